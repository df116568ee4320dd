//! The two-parameter family `p|ψ_ξ><ψ_ξ| + (1-p)|z+z+><z+z+|` and Werner
//! states for small local dimension.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ZERO};
use crate::quantum::{local_expectation, BlochVector, DensityMatrix, Party, PureState};

const ANGLE_SLACK: f64 = 1e-15;

/// Entanglement admixture `p` and the angle `xi` of `|ψ_ξ>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    p: f64,
    xi: f64,
}

impl FamilyParams {
    pub fn new(p: f64, xi: f64) -> Result<Self> {
        check_probability(p)?;
        check_angle(xi)?;
        Ok(Self {
            p,
            xi: xi.min(FRAC_PI_4),
        })
    }

    /// The singlet mixture (`xi = π/4`).
    pub fn singlet_mixture(p: f64) -> Result<Self> {
        Self::new(p, FRAC_PI_4)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// `sin(2ξ)`
    pub fn s(&self) -> f64 {
        (2.0 * self.xi).sin()
    }

    pub fn is_singlet_mixture(&self) -> bool {
        (self.xi - FRAC_PI_4).abs() <= ANGLE_SLACK
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

pub(crate) fn check_angle(xi: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_4 + ANGLE_SLACK).contains(&xi) {
        return Err(Error::OutOfRange(format!("angle {xi} outside [0, π/4]")));
    }
    Ok(())
}

/// `cos ξ |01> - sin ξ |10>`
pub fn psi_xi(xi: f64) -> Result<PureState> {
    check_angle(xi)?;
    let (s, c) = xi.min(FRAC_PI_4).sin_cos();
    PureState::new(vec![ZERO, C64::new(c, 0.0), C64::new(-s, 0.0), ZERO])
}

pub fn family_state(params: FamilyParams) -> DensityMatrix {
    let ent = psi_xi(params.xi).expect("validated angle").projector();
    let prod = PureState::basis(2, 0).expect("static").projector();
    DensityMatrix::mixture(&[(params.p, &ent), (1.0 - params.p, &prod)])
        .expect("convex weights")
}

/// `-p sin(2ξ)(a_x b_x + a_y b_y) + (1-2p) a_z b_z`
pub fn closed_form_correlation(params: FamilyParams, a: &BlochVector, b: &BlochVector) -> f64 {
    let p = params.p;
    -p * params.s() * (a.x * b.x + a.y * b.y) + (1.0 - 2.0 * p) * a.z * b.z
}

/// `(1-p) n_z` for the singlet mixture; any other angle is computed from the
/// state itself since no closed form is claimed there.
pub fn closed_form_local(params: FamilyParams, n: &BlochVector, party: Party) -> f64 {
    if params.is_singlet_mixture() {
        (1.0 - params.p) * n.z
    } else {
        local_expectation(&family_state(params), n, party).expect("two-qubit state")
    }
}

/// Local dimension `d` and admixture `p` of a Werner state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WernerParams {
    pub d: usize,
    pub p: f64,
}

impl WernerParams {
    pub fn new(d: usize, p: f64) -> Result<Self> {
        if !(2..=4).contains(&d) {
            return Err(Error::Unsupported(format!(
                "Werner states are implemented for d in 2..=4, got {d}"
            )));
        }
        check_probability(p)?;
        Ok(Self { d, p })
    }
}

/// `p·ρ_ent + (1-p)·I/d²` with `ρ_ent` the even mixture of `|ψ_kl^->`, k < l.
pub fn werner_state(params: WernerParams) -> DensityMatrix {
    let d = params.d;
    let dim = d * d;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let pairs = d * (d - 1) / 2;
    let mut ent = ComplexMatrix::zeros(dim, dim);
    for k in 0..d {
        for l in (k + 1)..d {
            let mut v = vec![ZERO; dim];
            v[k * d + l] = C64::new(h, 0.0);
            v[l * d + k] = C64::new(-h, 0.0);
            ent = &ent + &ComplexMatrix::outer(&v, &v);
        }
    }
    let ent = ent.scale_real(params.p / pairs as f64);
    let noise = ComplexMatrix::identity(dim).scale_real((1.0 - params.p) / dim as f64);
    DensityMatrix::new(&ent + &noise).expect("Werner state is a valid density matrix")
}

/// Werner entanglement and LHV thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WernerThresholds {
    /// Entangled for `p > p_ent = 1/(d+1)`.
    pub p_ent: f64,
    /// Werner's LHV model covers `p <= p_lhv = 1 - 1/d`.
    pub p_lhv: f64,
}

impl WernerThresholds {
    pub fn gap(&self) -> f64 {
        self.p_lhv - self.p_ent
    }
}

pub fn werner_thresholds(d: usize) -> Result<WernerThresholds> {
    if d < 2 {
        return Err(Error::OutOfRange(format!("local dimension {d} < 2")));
    }
    let d = d as f64;
    Ok(WernerThresholds {
        p_ent: 1.0 / (d + 1.0),
        p_lhv: 1.0 - 1.0 / d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{correlation, correlation_data};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn psi_xi_examples() {
        let s = psi_xi(FRAC_PI_4).unwrap();
        assert!((s.fidelity(&PureState::singlet()) - 1.0).abs() < 1e-15);
        let a = s.amplitudes();
        assert!((a[1].re - FRAC_1_SQRT_2).abs() < 1e-15 && (a[2].re + FRAC_1_SQRT_2).abs() < 1e-15);

        let p = psi_xi(0.0).unwrap();
        assert_eq!(p.amplitudes()[1], C64::new(1.0, 0.0));

        let t = psi_xi(PI / 6.0).unwrap();
        let want = [0.0, 3f64.sqrt() / 2.0, -0.5, 0.0];
        for (z, w) in t.amplitudes().iter().zip(want) {
            assert!((z.re - w).abs() < 1e-15 && z.im == 0.0);
        }
        assert!(psi_xi(1.0).is_err());
        assert!(psi_xi(-0.1).is_err());
    }

    #[test]
    fn family_state_endpoints() {
        let rho = family_state(FamilyParams::new(0.0, 0.3).unwrap());
        assert!(rho.matrix().max_abs_diff(&ComplexMatrix::diagonal(&[1.0, 0.0, 0.0, 0.0])) < 1e-15);
        let rho = family_state(FamilyParams::singlet_mixture(1.0).unwrap());
        assert!(rho.matrix().max_abs_diff(PureState::singlet().projector().matrix()) < 1e-15);
    }

    #[test]
    fn family_state_rank_two_at_half() {
        let rho = family_state(FamilyParams::singlet_mixture(0.5).unwrap());
        let ev = rho.eigenvalues().unwrap();
        assert!(ev[0].abs() < 1e-12 && ev[1].abs() < 1e-12, "{ev:?}");
    }

    #[test]
    fn params_validation() {
        assert!(FamilyParams::new(1.1, 0.1).is_err());
        assert!(FamilyParams::new(0.5, FRAC_PI_4 + 0.01).is_err());
        assert!(FamilyParams::new(0.5, FRAC_PI_4).is_ok());
        assert!(WernerParams::new(5, 0.5).is_err());
        assert!(WernerParams::new(1, 0.5).is_err());
        assert!(WernerParams::new(3, -0.5).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let s = FamilyParams::singlet_mixture(1.0).unwrap();
        assert!((closed_form_correlation(s, &BlochVector::Y, &BlochVector::Y) + 1.0).abs() < 1e-15);
        for xi in [0.0, 0.2, FRAC_PI_4] {
            let h = FamilyParams::new(0.5, xi).unwrap();
            assert_eq!(closed_form_correlation(h, &BlochVector::Z, &BlochVector::Z), 0.0);
        }
        // -0.3·sin(π/3), evaluated independently
        let want = -0.3 * 3f64.sqrt() / 2.0;
        let q = FamilyParams::new(0.3, PI / 6.0).unwrap();
        assert!((closed_form_correlation(q, &BlochVector::X, &BlochVector::X) - want).abs() < 1e-15);
        assert!((want + 0.259_807_621_135_331_5).abs() < 1e-15);
    }

    #[test]
    fn closed_form_local_examples() {
        let h = FamilyParams::singlet_mixture(0.5).unwrap();
        assert_eq!(closed_form_local(h, &BlochVector::Z, Party::A), 0.5);
        let one = FamilyParams::singlet_mixture(1.0).unwrap();
        let n = BlochVector::normalized(0.3, 0.4, 0.5).unwrap();
        assert_eq!(closed_form_local(one, &n, Party::B), 0.0);
        let q = FamilyParams::singlet_mixture(0.25).unwrap();
        let down = BlochVector::new(0.0, 0.0, -1.0).unwrap();
        assert_eq!(closed_form_local(q, &down, Party::A), -0.75);
    }

    #[test]
    fn general_angle_local_uses_trace() {
        let params = FamilyParams::new(0.4, 0.3).unwrap();
        let n = BlochVector::normalized(0.2, -0.1, 0.9).unwrap();
        let rho = family_state(params);
        for party in [Party::A, Party::B] {
            let direct = local_expectation(&rho, &n, party).unwrap();
            assert_eq!(closed_form_local(params, &n, party), direct);
        }
    }

    #[test]
    fn singlet_mixture_tensor_matches_closed_form() {
        for p in [0.0, 0.2, 0.5, 0.9] {
            let cd = correlation_data(&family_state(FamilyParams::singlet_mixture(p).unwrap())).unwrap();
            let want = [-p, -p, 1.0 - 2.0 * p];
            for (i, w) in want.iter().enumerate() {
                assert!((cd.tensor[i][i] - w).abs() < 1e-15);
            }
        }
        let rho = family_state(FamilyParams::singlet_mixture(1.0).unwrap());
        assert!((correlation(&rho, &BlochVector::X, &BlochVector::X).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn werner_endpoints() {
        let w0 = werner_state(WernerParams::new(2, 0.0).unwrap());
        assert!(w0.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-15);
        let w1 = werner_state(WernerParams::new(2, 1.0).unwrap());
        assert!(w1.matrix().max_abs_diff(PureState::singlet().projector().matrix()) < 1e-15);
        for d in 2..=4 {
            let w = werner_state(WernerParams::new(d, 0.7).unwrap());
            assert_eq!(w.dim(), d * d);
        }
    }

    #[test]
    fn werner_threshold_values() {
        let t2 = werner_thresholds(2).unwrap();
        assert!((t2.p_ent - 1.0 / 3.0).abs() < 1e-15 && t2.p_lhv == 0.5);
        assert!((t2.gap() - 1.0 / 6.0).abs() < 1e-15);
        let t3 = werner_thresholds(3).unwrap();
        assert_eq!((t3.p_ent, t3.p_lhv), (0.25, 1.0 - 1.0 / 3.0));
        let big = werner_thresholds(1_000_000).unwrap();
        assert!(big.gap() > 0.999_99);
        let mut last = 0.0;
        for d in 2..50 {
            let g = werner_thresholds(d).unwrap().gap();
            assert!(g > last);
            last = g;
        }
        assert!(werner_thresholds(1).is_err());
    }
}
