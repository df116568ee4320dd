mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use common::{random_state, random_unit, random_unitary, two_qubit_state, unit_vector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use werner_gap::bell::{
    audit_certificate, critical_visibility, optimize_settings_with, quantum_behavior, violation_threshold,
    zb_criterion, NelderMead, SearchOptions, SettingsSet, NO_SIGNALING_TOL,
};
use werner_gap::eigen::hermitian_eigenvalues;
use werner_gap::entanglement::{is_product_pure, ppt_witness, product_from_coefficients};
use werner_gap::lhv::{extend_model, extended_target, lhv_validity_bound, mimic_state, sample_rounds};
use werner_gap::matrix::{tensor_product, ComplexMatrix, C64};
use werner_gap::quantum::{
    correlation, correlation_data, local_expectation, partial_trace, partial_transpose_matrix, pauli_observable,
    BlochVector, DensityMatrix, Party,
};
use werner_gap::region::{scan, write_csv, write_json, ScanConfig, ScanDocument};
use werner_gap::states::{
    closed_form_correlation, closed_form_local, family_state, werner_state, FamilyParams, WernerParams,
};

fn family() -> impl Strategy<Value = FamilyParams> {
    (0.0f64..=1.0, 0.0f64..=FRAC_PI_4).prop_map(|(p, xi)| FamilyParams::new(p, xi).unwrap())
}

fn assert_valid_state(rho: &DensityMatrix) {
    let m = rho.matrix();
    assert!(m.hermiticity_defect() <= 1e-12);
    assert!((m.trace().re - 1.0).abs() <= 1e-12 && m.trace().im.abs() <= 1e-12);
    assert!(rho.eigenvalues().unwrap()[0] >= -1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tensor_form_matches_trace_form(rho in two_qubit_state(), a in unit_vector(), b in unit_vector()) {
        let data = correlation_data(&rho).unwrap();
        prop_assert!((data.correlation(&a, &b) - correlation(&rho, &a, &b).unwrap()).abs() <= 1e-12);
        for row in data.tensor {
            prop_assert!(row.iter().all(|t| t.abs() <= 1.0 + 1e-10));
        }
    }

    #[test]
    fn family_closed_form_correlation(params in family(), a in unit_vector(), b in unit_vector()) {
        let rho = family_state(params);
        let exact = correlation(&rho, &a, &b).unwrap();
        prop_assert!((closed_form_correlation(params, &a, &b) - exact).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_states_are_valid(params in family(), d in 2usize..=4, q in 0.0f64..=1.0, rho in two_qubit_state()) {
        assert_valid_state(&family_state(params));
        assert_valid_state(&werner_state(WernerParams::new(d, q).unwrap()));
        assert_valid_state(&rho);
        let mix = DensityMatrix::mixture(&[(q, &rho), (1.0 - q, &family_state(params))]).unwrap();
        assert_valid_state(&mix);
    }

    #[test]
    fn partial_transpose_is_involution(rho in two_qubit_state()) {
        for party in [Party::A, Party::B] {
            let once = partial_transpose_matrix(rho.matrix(), (2, 2), party).unwrap();
            let twice = partial_transpose_matrix(&once, (2, 2), party).unwrap();
            prop_assert!(twice.max_abs_diff(rho.matrix()) <= 1e-14);
        }
    }

    #[test]
    fn reduced_states_match_local_expectations(rho in two_qubit_state(), n in unit_vector()) {
        let obs = pauli_observable(&n);
        for party in [Party::A, Party::B] {
            let reduced = partial_trace(&rho, (2, 2), party).unwrap();
            let direct = local_expectation(&rho, &n, party).unwrap();
            prop_assert!((reduced.expectation(&obs).unwrap() - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn product_observable_spectrum(a in unit_vector(), b in unit_vector()) {
        let op = tensor_product(&pauli_observable(&a), &pauli_observable(&b));
        let ev = hermitian_eigenvalues(&op).unwrap();
        for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            prop_assert!((got - want).abs() <= 1e-10);
        }
    }

    #[test]
    fn singlet_mixture_local_closed_form(p in 0.0f64..=1.0, n in unit_vector()) {
        let params = FamilyParams::singlet_mixture(p).unwrap();
        let rho = family_state(params);
        for party in [Party::A, Party::B] {
            let exact = local_expectation(&rho, &n, party).unwrap();
            prop_assert!((closed_form_local(params, &n, party) - exact).abs() <= 1e-12);
        }
    }

    #[test]
    fn family_tensor_is_diagonal(params in family()) {
        let t = correlation_data(&family_state(params)).unwrap().tensor;
        for (i, row) in t.iter().enumerate() {
            for (j, tij) in row.iter().enumerate() {
                if i != j {
                    prop_assert!(tij.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn product_round_trip(k in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..=5), phase in 0.0f64..std::f64::consts::TAU) {
        let k: Vec<C64> = k.into_iter().map(|(r, i)| C64::new(r, i)).collect();
        let psi = product_from_coefficients(&k).unwrap();
        let rotated = werner_gap::quantum::PureState::new(
            psi.amplitudes().iter().map(|z| z * C64::from_polar(1.0, phase)).collect(),
        ).unwrap();
        let d = is_product_pure(&rotated, k.len()).unwrap();
        prop_assert!(d.is_product);
        let back = d.reconstruct().unwrap();
        prop_assert!(back.fidelity(&rotated) >= 1.0 - 1e-10);
    }

    #[test]
    fn ppt_witness_is_continuous(p in 0.0f64..0.999, xi in 0.0f64..=FRAC_PI_4) {
        let w = |p| ppt_witness(&family_state(FamilyParams::new(p, xi).unwrap()), (2, 2)).unwrap();
        prop_assert!((w(p) - w(p + 1e-6)).abs() < 1e-4);
    }

    #[test]
    fn mimic_reproduces_correlations(
        u in 0.0f64..=1.0,
        xi in 0.0f64..=FRAC_PI_4,
        a in unit_vector(),
        b in unit_vector(),
    ) {
        let p = u * lhv_validity_bound(xi).unwrap();
        let params = FamilyParams::new(p, xi).unwrap();
        let mimic = mimic_state(params).unwrap();
        prop_assert!(mimic.components().iter().all(|c| c.weight >= 0.0));
        let total: f64 = mimic.components().iter().map(|c| c.weight).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        let via_density = correlation(&mimic.density(), &a, &b).unwrap();
        prop_assert!((via_density - closed_form_correlation(params, &a, &b)).abs() <= 1e-12);
    }

    #[test]
    fn equatorial_marginals_of_mimic(p in 0.0f64..=0.5, phi_a in 0.0f64..6.3, phi_b in 0.0f64..6.3) {
        let params = FamilyParams::singlet_mixture(p).unwrap();
        let mimic = mimic_state(params).unwrap();
        let a = BlochVector::from_angles(std::f64::consts::FRAC_PI_2, phi_a);
        let b = BlochVector::from_angles(std::f64::consts::FRAC_PI_2, phi_b);
        prop_assert!((mimic.local(&a, Party::A) - closed_form_local(params, &a, Party::A)).abs() <= 1e-12);
        prop_assert!((mimic.local(&b, Party::B) - closed_form_local(params, &b, Party::B)).abs() <= 1e-12);
        prop_assert!(mimic.local(&a, Party::A).abs() <= 1e-12);
    }

    #[test]
    fn behaviors_are_no_signaling(rho in two_qubit_state(), dirs in prop::collection::vec(unit_vector(), 6)) {
        let s = SettingsSet::new(dirs[..3].to_vec(), dirs[3..].to_vec()).unwrap();
        let t = quantum_behavior(&rho, &s).unwrap();
        prop_assert!(t.signaling_defect() <= NO_SIGNALING_TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_certificates_are_sound(rho in two_qubit_state(), dirs in prop::collection::vec(unit_vector(), 5), noise in 0.0f64..1.0) {
        // mix toward a maximally entangled state so both outcomes occur
        let singlet = werner_gap::quantum::PureState::singlet().projector();
        let rho = DensityMatrix::mixture(&[(noise, &rho), (1.0 - noise, &singlet)]).unwrap();
        let s = SettingsSet::new(dirs[..2].to_vec(), dirs[2..].to_vec()).unwrap();
        let t = quantum_behavior(&rho, &s).unwrap();
        let r = critical_visibility(&t).unwrap();
        let metric = audit_certificate(&t, &r).unwrap();
        if r.is_local() {
            prop_assert!(metric <= 1e-8);
        } else {
            prop_assert!(metric > 1e-8);
        }
    }
}

#[test]
fn family_rank_at_most_two() {
    for i in 0..50 {
        for j in 0..50 {
            let p = i as f64 / 49.0;
            let xi = FRAC_PI_4 * j as f64 / 49.0;
            let ev = family_state(FamilyParams::new(p, xi).unwrap()).eigenvalues().unwrap();
            // ascending: the third largest is ev[1]
            assert!(ev[1] < 1e-10, "p = {p}, ξ = {xi}: {ev:?}");
        }
    }
}

#[test]
fn werner_states_are_unitarily_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in [2, 3] {
        let rho = werner_state(WernerParams::new(d, 0.7).unwrap());
        for _ in 0..20 {
            let u = random_unitary(&mut rng, d);
            let uu = tensor_product(&u, &u);
            let rotated = rho.conjugate_by(&uu).unwrap();
            assert!(rotated.matrix().max_abs_diff(rho.matrix()) <= 1e-10);
        }
    }
}

#[test]
fn mimic_exists_iff_within_bound() {
    for k in 0..10 {
        let xi = FRAC_PI_4 * k as f64 / 9.0;
        let bound = lhv_validity_bound(xi).unwrap();
        for i in 0..=1000 {
            let p = i as f64 / 1000.0;
            let ok = mimic_state(FamilyParams::new(p, xi).unwrap()).is_ok();
            assert_eq!(ok, p <= bound, "ξ = {xi}, p = {p}, bound = {bound}");
        }
    }
}

/// Smallest `p` at which the two-setting criterion fires, by bisection.
fn zb_onset(xi: f64) -> f64 {
    let fires = |p: f64| zb_criterion(&correlation_data(&family_state(FamilyParams::new(p, xi).unwrap())).unwrap().tensor).violates;
    let (mut lo, mut hi) = (0.0, 1.0);
    assert!(fires(hi));
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fires(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[test]
fn zb_onset_brackets_threshold() {
    for k in 1..=20 {
        let xi = FRAC_PI_4 * k as f64 / 20.0;
        match violation_threshold(xi).unwrap().p_star() {
            Some(p_star) => assert!((zb_onset(xi) - p_star).abs() <= 1e-6, "ξ = {xi}"),
            None => panic!("threshold should be attainable at ξ = {xi}"),
        }
    }
}

#[test]
fn werner_visibility_structure() {
    let s = SettingsSet::chsh_optimal();
    for p in [0.3, 0.6, FRAC_1_SQRT_2, 0.8, 0.9, 1.0] {
        let t = quantum_behavior(&werner_state(WernerParams::new(2, p).unwrap()), &s).unwrap();
        let v = critical_visibility(&t).unwrap().v_critical;
        let want = (1.0 / (std::f64::consts::SQRT_2 * p)).min(1.0);
        assert!((v - want).abs() <= 1e-6, "p = {p}: {v} vs {want}");
    }
}

#[test]
fn search_is_monotone_in_settings() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let fast = NelderMead {
        max_iter: 150,
        ..NelderMead::default()
    };
    for _ in 0..10 {
        let singlet = werner_gap::quantum::PureState::singlet().projector();
        let noise = random_state(&mut rng, 4);
        let rho = DensityMatrix::mixture(&[(0.8, &singlet), (0.2, &noise)]).unwrap();
        let mut last = f64::INFINITY;
        let mut warm = None;
        for m in 2..=4 {
            let opts = SearchOptions {
                restarts: 3,
                seed: 4,
                optimizer: fast,
                warm_start: warm.clone(),
                ..SearchOptions::default()
            };
            let r = optimize_settings_with(&rho, m, m, &opts).unwrap();
            assert!(r.v_min <= last + 1e-9, "m = {m}: {} after {last}", r.v_min);
            last = r.v_min;
            warm = Some(r.settings().clone());
        }
    }
}

#[test]
fn sampler_marginal_ignores_remote_setting() {
    let model = mimic_state(FamilyParams::singlet_mixture(0.5).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_unit(&mut rng);
    let n = 1_000_000u64;
    let s1 = sample_rounds(&model, &a, &BlochVector::Z, n, 77).unwrap();
    let s2 = sample_rounds(&model, &a, &BlochVector::X, n, 78).unwrap();
    let target = model.local(&a, Party::A);
    let se = ((1.0 - target * target) / n as f64).sqrt();
    // difference of two independent estimates
    assert!((s1.local_a - s2.local_a).abs() <= 5.0 * se * std::f64::consts::SQRT_2);
}

#[test]
fn extended_model_within_sampling_bands() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 200_000u64;
    for q in [0.1, 0.3, 0.5] {
        let model = extend_model(q).unwrap();
        for k in 0..20 {
            let a = random_unit(&mut rng);
            let b = random_unit(&mut rng);
            let want = extended_target(q, &a, &b).correlation;
            assert!((model.correlation(&a, &b) - want).abs() <= 1e-12);
            let got = sample_rounds(&model, &a, &b, n, 1000 + k).unwrap();
            let se = ((1.0 - want * want) / n as f64).sqrt();
            assert!((got.correlation - want).abs() <= 5.0 * se, "q = {q}, pair {k}");
        }
    }
}

#[test]
fn scan_partition_and_gap() {
    let pts = scan(&ScanConfig::full(41, 401)).unwrap();
    for row in pts.chunks(401) {
        let xi = row[0].xi;
        assert!(row.iter().all(|p| !(p.lhv_modelled && p.bell_violating)));
        if xi > 0.0 {
            let gap = row.iter().filter(|p| p.entangled && p.lhv_modelled).count();
            assert!(gap > 0, "empty gap at ξ = {xi}");
        }
    }
    // the gap covers nearly the whole p range at the smallest positive angle
    let near_zero = &pts[401..802];
    let gap = near_zero.iter().filter(|p| p.entangled && p.lhv_modelled).count();
    assert!(gap as f64 / 401.0 > 0.9);
}

fn render(config: &ScanConfig) -> (Vec<u8>, Vec<u8>) {
    let pts = scan(config).unwrap();
    let mut csv = Vec::new();
    write_csv(&pts, &mut csv).unwrap();
    let mut json = Vec::new();
    write_json(&ScanDocument::new(config.clone(), pts), &mut json).unwrap();
    (csv, json)
}

#[test]
fn outputs_are_byte_identical() {
    let mut config = ScanConfig::full(17, 23);
    config.seed = 99;
    assert_eq!(render(&config), render(&config));
}

#[test]
fn outputs_round_trip() {
    let config = ScanConfig::full(13, 29);
    let pts = scan(&config).unwrap();
    let (csv, json) = render(&config);

    let doc: ScanDocument = serde_json::from_slice(&json).unwrap();
    assert_eq!(doc.points, pts);
    assert_eq!(doc.config, config);

    let mut reader = csv::Reader::from_reader(csv.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), pts.len());
    for (row, pt) in rows.iter().zip(&pts) {
        let num = |i: usize| row[i].parse::<f64>().unwrap();
        assert_eq!(num(0), pt.xi);
        assert_eq!(num(1), pt.xi / std::f64::consts::PI);
        assert_eq!(num(2), pt.p);
        assert_eq!(row[3].parse::<bool>().unwrap(), pt.entangled);
        assert_eq!(num(6), pt.lhv_bound);
        assert_eq!(row[7].parse::<f64>().ok(), pt.p_star);
        assert_eq!(num(8), pt.pt_min_eig);
    }
}

#[test]
fn unit_vectors_from_helpers() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let v = random_unit(&mut rng);
        assert!((v.dot(&v) - 1.0).abs() < 1e-12);
    }
    let _ = ComplexMatrix::identity(2);
}
