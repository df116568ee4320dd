//! Classification of the `(ξ, p)` plane into entangled, locally modelled and
//! Bell-violating regions, plus the single-point and mimic reports behind
//! the command-line tool.

use std::f64::consts::{FRAC_PI_4, PI};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{optimize_settings, violation_threshold, zb_criterion, SearchResult, ViolationThreshold};
use crate::entanglement::ppt_witness;
use crate::error::{Error, Result};
use crate::lhv::{lhv_validity_bound, mimic_state, sample_rounds, GENERATOR_ID};
use crate::quantum::{correlation_data, BlochVector};
use crate::states::{check_angle, check_probability, family_state, FamilyParams};

/// Allowed disagreement between the closed-form and eigensolver PT minima.
pub const PT_AUDIT_TOL: f64 = 1e-10;
/// Deterministic setting pairs used by [`verify_mimic`].
pub const MIMIC_PAIRS: usize = 200;
/// Pairs among those that are also sampled by Monte Carlo.
pub const MIMIC_MC_PAIRS: usize = 10;
/// Grid points per axis between numeric PT audits.
const AUDIT_STRIDE: usize = 10;
const PAIR_SEED: u64 = 0x005e_ed0f_5e77_1a95;

pub const CSV_HEADER: &str =
    "xi_rad,xi_over_pi,p,entangled,lhv_modelled,bell_violating,lhv_bound,p_star,pt_min_eig";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegionPoint {
    pub xi: f64,
    pub p: f64,
    pub entangled: bool,
    pub lhv_modelled: bool,
    pub bell_violating: bool,
    /// `None` when no admixture violates.
    pub p_star: Option<f64>,
    pub lhv_bound: f64,
    pub pt_min_eig: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_min: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpSettings {
    pub m: usize,
    pub restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanConfig {
    pub xi_steps: usize,
    pub p_steps: usize,
    pub xi_range: [f64; 2],
    pub p_range: [f64; 2],
    pub output_format: OutputFormat,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp_settings: Option<LpSettings>,
}

impl ScanConfig {
    /// Full `[0, π/4] × [0, 1]` grid.
    pub fn full(xi_steps: usize, p_steps: usize) -> Self {
        Self {
            xi_steps,
            p_steps,
            xi_range: [0.0, FRAC_PI_4],
            p_range: [0.0, 1.0],
            output_format: OutputFormat::Csv,
            seed: 0,
            lp_settings: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.xi_steps == 0 || self.p_steps == 0 {
            return Err(Error::OutOfRange("grid steps must be positive".into()));
        }
        let [x0, x1] = self.xi_range;
        let [p0, p1] = self.p_range;
        if !(x0 <= x1 && p0 <= p1) {
            return Err(Error::OutOfRange("range bounds are reversed".into()));
        }
        check_angle(x0)?;
        check_angle(x1)?;
        check_probability(p0)?;
        check_probability(p1)?;
        if let Some(lp) = self.lp_settings {
            if lp.m == 0 || lp.m > crate::bell::MAX_SETTINGS || lp.restarts == 0 {
                return Err(Error::OutOfRange(format!(
                    "LP settings m = {}, restarts = {}",
                    lp.m, lp.restarts
                )));
            }
        }
        Ok(())
    }

    pub fn xi_values(&self) -> Vec<f64> {
        linspace(self.xi_range, self.xi_steps)
    }

    pub fn p_values(&self) -> Vec<f64> {
        linspace(self.p_range, self.p_steps)
    }
}

/// Endpoints are hit exactly.
fn linspace([lo, hi]: [f64; 2], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Parses an angle written as `0.3`, `0.25pi`, `pi/4` or `3pi/16`; `π` is
/// accepted for `pi`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let bad = || Error::OutOfRange(format!("cannot parse angle {text:?}"));
    let t = text.trim().to_ascii_lowercase().replace('π', "pi");
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim().parse::<f64>().map_err(|_| bad())?)),
        None => (t.as_str(), None),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let c = match coef.trim().trim_end_matches('*') {
                "" | "+" => 1.0,
                "-" => -1.0,
                other => other.parse::<f64>().map_err(|_| bad())?,
            };
            c * PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let value = match den {
        Some(d) if d != 0.0 => value / d,
        Some(_) => return Err(bad()),
        None => value,
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Smallest eigenvalue of the partial transpose of the family state:
/// `((1-p) - sqrt((1-p)² + p² sin² 2ξ))/2`, evaluated without cancellation.
pub fn family_pt_min_eig(params: FamilyParams) -> f64 {
    let x = 1.0 - params.p();
    let y = params.p() * params.xi().sin() * params.xi().cos();
    if y == 0.0 {
        return 0.0;
    }
    -2.0 * y * y / (x + (x * x + 4.0 * y * y).sqrt())
}

fn classify(params: FamilyParams) -> Result<RegionPoint> {
    let (p, xi) = (params.p(), params.xi());
    let lhv_bound = lhv_validity_bound(xi)?;
    let p_star = violation_threshold(xi)?.p_star();
    let point = RegionPoint {
        xi,
        p,
        entangled: p > 0.0 && xi > 0.0,
        lhv_modelled: p <= lhv_bound,
        bell_violating: p_star.is_some_and(|t| p > t),
        p_star,
        lhv_bound,
        pt_min_eig: family_pt_min_eig(params),
        v_min: None,
    };
    if point.lhv_modelled && point.bell_violating {
        return Err(Error::Numerical(format!(
            "point (ξ = {xi}, p = {p}) is both locally modelled and violating"
        )));
    }
    if point.bell_violating && !point.entangled {
        return Err(Error::Numerical(format!(
            "point (ξ = {xi}, p = {p}) violates without entanglement"
        )));
    }
    Ok(point)
}

fn audit_pt(params: FamilyParams, closed: f64) -> Result<()> {
    let numeric = ppt_witness(&family_state(params), (2, 2))?;
    if (numeric - closed).abs() > PT_AUDIT_TOL {
        return Err(Error::Numerical(format!(
            "PT minimum at (ξ = {}, p = {}): eigensolver {numeric}, closed form {closed}",
            params.xi(),
            params.p()
        )));
    }
    Ok(())
}

/// Classifies every grid point, row-major over `(ξ, p)`.
///
/// Entanglement uses `p > 0 ∧ ξ > 0`; the PT minimum on every
/// `AUDIT_STRIDE`-th row and column, plus the far edges, is recomputed by
/// eigensolver and must agree with the closed form.
pub fn scan(config: &ScanConfig) -> Result<Vec<RegionPoint>> {
    config.validate()?;
    let xis = config.xi_values();
    let ps = config.p_values();
    let audited = |i: usize, n: usize| i.is_multiple_of(AUDIT_STRIDE) || i + 1 == n;
    let cells: Vec<(usize, usize)> = (0..xis.len())
        .flat_map(|i| (0..ps.len()).map(move |j| (i, j)))
        .collect();
    cells
        .par_iter()
        .map(|&(i, j)| {
            let params = FamilyParams::new(ps[j], xis[i])?;
            let mut point = classify(params)?;
            if audited(i, xis.len()) && audited(j, ps.len()) {
                audit_pt(params, point.pt_min_eig)?;
            }
            if let Some(lp) = config.lp_settings {
                let r = optimize_settings(&family_state(params), lp.m, lp.restarts, config.seed)?;
                point.v_min = Some(r.v_min);
            }
            Ok(point)
        })
        .collect()
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Rows in the given order; `v_min` is appended as a last column when any
/// point carries it. An unattainable `p_star` is written as an empty field.
pub fn write_csv<W: Write>(points: &[RegionPoint], out: &mut W) -> std::io::Result<()> {
    let with_lp = points.iter().any(|p| p.v_min.is_some());
    write!(out, "{CSV_HEADER}")?;
    if with_lp {
        write!(out, ",v_min")?;
    }
    writeln!(out)?;
    for pt in points {
        write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            pt.xi,
            pt.xi / PI,
            pt.p,
            pt.entangled,
            pt.lhv_modelled,
            pt.bell_violating,
            pt.lhv_bound,
            csv_opt(pt.p_star),
            pt.pt_min_eig
        )?;
        if with_lp {
            write!(out, ",{}", csv_opt(pt.v_min))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputMeta {
    pub version: String,
    pub seed: u64,
    pub generator: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanDocument {
    pub config: ScanConfig,
    pub points: Vec<RegionPoint>,
    pub meta: OutputMeta,
}

impl ScanDocument {
    pub fn new(config: ScanConfig, points: Vec<RegionPoint>) -> Self {
        let meta = OutputMeta {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            generator: GENERATOR_ID.to_string(),
        };
        Self { config, points, meta }
    }
}

pub fn write_json<W: Write>(doc: &ScanDocument, out: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, doc)
        .map_err(|e| Error::Numerical(format!("JSON output: {e}")))?;
    writeln!(out).map_err(|e| Error::Numerical(format!("JSON output: {e}")))
}

/// Single-point classification with the quantities behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PointReport {
    #[serde(flatten)]
    pub point: RegionPoint,
    pub xi_over_pi: f64,
    /// Eigensolver value; agrees with `ptMinEig`.
    pub pt_min_eig_numeric: f64,
    pub t_diagonal: [f64; 3],
    pub local_z: f64,
    /// Sum of the two largest squared singular values of `T`.
    pub zb_value: f64,
    pub threshold: ViolationThreshold,
}

pub fn check_point(p: f64, xi: f64) -> Result<PointReport> {
    let params = FamilyParams::new(p, xi)?;
    let point = classify(params)?;
    let rho = family_state(params);
    let numeric = ppt_witness(&rho, (2, 2))?;
    if (numeric - point.pt_min_eig).abs() > PT_AUDIT_TOL {
        return Err(Error::Numerical(format!(
            "PT minimum disagreement: {numeric} vs {}",
            point.pt_min_eig
        )));
    }
    let data = correlation_data(&rho)?;
    Ok(PointReport {
        xi_over_pi: point.xi / PI,
        pt_min_eig_numeric: numeric,
        t_diagonal: [data.tensor[0][0], data.tensor[1][1], data.tensor[2][2]],
        local_z: data.local_a[2],
        zb_value: zb_criterion(&data.tensor).value,
        threshold: violation_threshold(params.xi())?,
        point,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LpReport {
    pub p: f64,
    pub xi: f64,
    pub m: usize,
    #[serde(flatten)]
    pub search: SearchResult,
}

pub fn run_lp(p: f64, xi: f64, m: usize, restarts: usize, seed: u64) -> Result<LpReport> {
    let params = FamilyParams::new(p, xi)?;
    let search = optimize_settings(&family_state(params), m, restarts, seed)?;
    Ok(LpReport {
        p,
        xi: params.xi(),
        m,
        search,
    })
}

/// The fixed list of setting pairs used by [`verify_mimic`]: the axis pairs
/// `zz, xx, yy, xy, zx`, then directions uniform on the sphere.
pub fn mimic_setting_pairs() -> Vec<(BlochVector, BlochVector)> {
    use BlochVector as B;
    let mut pairs = vec![(B::Z, B::Z), (B::X, B::X), (B::Y, B::Y), (B::X, B::Y), (B::Z, B::X)];
    let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SEED);
    let uniform = |rng: &mut ChaCha8Rng| {
        let theta = (1.0 - 2.0 * rng.gen::<f64>()).acos();
        B::from_angles(theta, rng.gen::<f64>() * std::f64::consts::TAU)
    };
    while pairs.len() < MIMIC_PAIRS {
        let a = uniform(&mut rng);
        let b = uniform(&mut rng);
        pairs.push((a, b));
    }
    pairs
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MimicReport {
    pub p: f64,
    pub xi: f64,
    pub lhv_bound: f64,
    pub pairs: usize,
    /// `max |E_mimic - E_QM|` over all pairs, both from closed-form sums.
    pub exact_max_deviation: f64,
    pub samples: u64,
    pub mc_pairs: usize,
    /// `max |Ê - E_QM|` over the sampled pairs; `None` without sampling.
    pub mc_max_deviation: Option<f64>,
    /// The same deviation in units of the binomial standard error.
    pub mc_max_sigma: Option<f64>,
    pub seed: u64,
    pub generator: String,
}

/// Checks the separable mimic against the quantum correlations. With
/// `samples > 0` the first [`MIMIC_MC_PAIRS`] pairs are also sampled, pair
/// `k` using seed `seed + k`.
pub fn verify_mimic(p: f64, xi: f64, samples: u64, seed: u64) -> Result<MimicReport> {
    let params = FamilyParams::new(p, xi)?;
    let mimic = mimic_state(params)?;
    let data = correlation_data(&family_state(params))?;
    let pairs = mimic_setting_pairs();
    let exact = pairs
        .iter()
        .map(|(a, b)| (mimic.correlation(a, b) - data.correlation(a, b)).abs())
        .fold(0.0, f64::max);
    let (mut mc_dev, mut mc_sigma) = (None, None);
    if samples > 0 {
        let mut dev = 0.0f64;
        let mut sig = 0.0f64;
        for (k, (a, b)) in pairs.iter().take(MIMIC_MC_PAIRS).enumerate() {
            let stats = sample_rounds(&mimic, a, b, samples, seed.wrapping_add(k as u64))?;
            let target = data.correlation(a, b);
            let d = (stats.correlation - target).abs();
            let se = ((1.0 - target * target).max(0.0) / samples as f64).sqrt();
            dev = dev.max(d);
            sig = sig.max(if se > 0.0 { d / se } else if d == 0.0 { 0.0 } else { f64::INFINITY });
        }
        mc_dev = Some(dev);
        mc_sigma = Some(sig);
    }
    Ok(MimicReport {
        p,
        xi: params.xi(),
        lhv_bound: lhv_validity_bound(params.xi())?,
        pairs: pairs.len(),
        exact_max_deviation: exact,
        samples,
        mc_pairs: if samples > 0 { MIMIC_MC_PAIRS } else { 0 },
        mc_max_deviation: mc_dev,
        mc_max_sigma: mc_sigma,
        seed,
        generator: GENERATOR_ID.to_string(),
    })
}
