//! Bell-violation analysis for two-qubit states: two-setting correlation
//! thresholds, full-behavior tables, the white-noise critical visibility LP
//! over deterministic local strategies, and a search over measurement
//! directions.

mod polytope;
mod search;
pub mod simplex;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::tensor_product;
use crate::quantum::{correlation, BlochVector, DensityMatrix};
use crate::states::check_angle;

pub use polytope::{
    audit_certificate, critical_visibility, critical_visibility_with, strategy_count,
    Certificate, LpOptions, SeparatingInequality, StrategyWeight, VisibilityResult, LP_TOL,
    MAX_STRATEGIES,
};
pub use search::{optimize_settings, optimize_settings_with, NelderMead, SearchOptions, SearchResult};

/// Upper limit on settings per side.
pub const MAX_SETTINGS: usize = 6;

/// Probability tolerance for behavior tables.
pub const PROB_TOL: f64 = 1e-12;
/// No-signaling tolerance for behavior tables.
pub const NO_SIGNALING_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingsSet {
    #[serde(rename = "a")]
    settings_a: Vec<BlochVector>,
    #[serde(rename = "b")]
    settings_b: Vec<BlochVector>,
}

impl SettingsSet {
    pub fn new(settings_a: Vec<BlochVector>, settings_b: Vec<BlochVector>) -> Result<Self> {
        for (side, list) in [("A", &settings_a), ("B", &settings_b)] {
            if list.is_empty() || list.len() > MAX_SETTINGS {
                return Err(Error::OutOfRange(format!(
                    "party {side} has {} settings; allowed 1..={MAX_SETTINGS}",
                    list.len()
                )));
            }
            for n in list {
                let norm2 = n.dot(n);
                if (norm2 - 1.0).abs() > 1e-12 {
                    return Err(Error::NotUnit(norm2.sqrt()));
                }
            }
        }
        Ok(Self {
            settings_a,
            settings_b,
        })
    }

    /// A: `z`, `x`; B: `(z ± x)/√2`.
    pub fn chsh_optimal() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            settings_a: vec![BlochVector::Z, BlochVector::X],
            settings_b: vec![
                BlochVector { x: h, y: 0.0, z: h },
                BlochVector { x: -h, y: 0.0, z: h },
            ],
        }
    }

    pub fn a(&self) -> &[BlochVector] {
        &self.settings_a
    }

    pub fn b(&self) -> &[BlochVector] {
        &self.settings_b
    }

    pub fn m_a(&self) -> usize {
        self.settings_a.len()
    }

    pub fn m_b(&self) -> usize {
        self.settings_b.len()
    }
}

/// `P(a, b | x, y)` with outcomes ordered `(+,+), (+,-), (-,+), (-,-)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorTable {
    m_a: usize,
    m_b: usize,
    probs: Vec<[f64; 4]>,
}

impl BehaviorTable {
    /// `probs[x * m_b + y]` is the outcome distribution for settings `(x, y)`.
    pub fn new(m_a: usize, m_b: usize, probs: Vec<[f64; 4]>) -> Result<Self> {
        if m_a == 0 || m_b == 0 || probs.len() != m_a * m_b {
            return Err(Error::DimensionMismatch(format!(
                "{} slices for {m_a}x{m_b} settings",
                probs.len()
            )));
        }
        for (k, slice) in probs.iter().enumerate() {
            let total: f64 = slice.iter().sum();
            if slice.iter().any(|&p| p.is_nan() || p < -PROB_TOL || !p.is_finite()) || (total - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidState(format!(
                    "slice {k} is not a probability distribution: {slice:?}"
                )));
            }
        }
        let table = Self { m_a, m_b, probs };
        for x in 0..m_a {
            let first = table.marginal_a_at(x, 0);
            for y in 1..m_b {
                if (table.marginal_a_at(x, y) - first).abs() > NO_SIGNALING_TOL {
                    return Err(Error::InvalidState(format!(
                        "A marginal for setting {x} depends on B's setting"
                    )));
                }
            }
        }
        for y in 0..m_b {
            let first = table.marginal_b_at(0, y);
            for x in 1..m_a {
                if (table.marginal_b_at(x, y) - first).abs() > NO_SIGNALING_TOL {
                    return Err(Error::InvalidState(format!(
                        "B marginal for setting {y} depends on A's setting"
                    )));
                }
            }
        }
        Ok(table)
    }

    /// Builds the table from correlators and marginals.
    pub fn from_correlators(
        local_a: &[f64],
        local_b: &[f64],
        corr: &[Vec<f64>],
    ) -> Result<Self> {
        let (m_a, m_b) = (local_a.len(), local_b.len());
        if corr.len() != m_a || corr.iter().any(|r| r.len() != m_b) {
            return Err(Error::DimensionMismatch("correlator table shape".into()));
        }
        let mut probs = Vec::with_capacity(m_a * m_b);
        for x in 0..m_a {
            for y in 0..m_b {
                let (ea, eb, e) = (local_a[x], local_b[y], corr[x][y]);
                probs.push([
                    (1.0 + ea + eb + e) / 4.0,
                    (1.0 + ea - eb - e) / 4.0,
                    (1.0 - ea + eb - e) / 4.0,
                    (1.0 - ea - eb + e) / 4.0,
                ]);
            }
        }
        Self::new(m_a, m_b, probs)
    }

    pub fn m_a(&self) -> usize {
        self.m_a
    }

    pub fn m_b(&self) -> usize {
        self.m_b
    }

    pub fn slice(&self, x: usize, y: usize) -> &[f64; 4] {
        &self.probs[x * self.m_b + y]
    }

    fn marginal_a_at(&self, x: usize, y: usize) -> f64 {
        let p = self.slice(x, y);
        p[0] + p[1] - p[2] - p[3]
    }

    fn marginal_b_at(&self, x: usize, y: usize) -> f64 {
        let p = self.slice(x, y);
        p[0] - p[1] + p[2] - p[3]
    }

    /// `Σ ab P(a,b|x,y)`
    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        let p = self.slice(x, y);
        p[0] - p[1] - p[2] + p[3]
    }

    /// `E(a_x)`
    pub fn local_a(&self, x: usize) -> f64 {
        self.marginal_a_at(x, 0)
    }

    /// `E(b_y)`
    pub fn local_b(&self, y: usize) -> f64 {
        self.marginal_b_at(0, y)
    }

    /// `v·P + (1-v)/4`
    pub fn with_visibility(&self, v: f64) -> Self {
        Self {
            m_a: self.m_a,
            m_b: self.m_b,
            probs: self
                .probs
                .iter()
                .map(|s| s.map(|p| v * p + (1.0 - v) / 4.0))
                .collect(),
        }
    }

    /// Largest deviation of the A (B) marginal across the other side's settings.
    pub fn signaling_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.m_a {
            for y in 0..self.m_b {
                worst = worst.max((self.marginal_a_at(x, y) - self.local_a(x)).abs());
                worst = worst.max((self.marginal_b_at(x, y) - self.local_b(y)).abs());
            }
        }
        worst
    }
}

/// Born-rule table `P(a,b|x,y) = Tr[ρ (Π_a^x ⊗ Π_b^y)]`.
pub fn quantum_behavior(rho: &DensityMatrix, settings: &SettingsSet) -> Result<BehaviorTable> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    let mut probs = Vec::with_capacity(settings.m_a() * settings.m_b());
    for a in settings.a() {
        let pa = [a.projector(1), a.projector(-1)];
        for b in settings.b() {
            let pb = [b.projector(1), b.projector(-1)];
            let mut slice = [0.0; 4];
            for (i, ma) in pa.iter().enumerate() {
                for (j, mb) in pb.iter().enumerate() {
                    slice[2 * i + j] = rho.expectation(&tensor_product(ma, mb))?;
                }
            }
            probs.push(slice);
        }
    }
    BehaviorTable::new(settings.m_a(), settings.m_b(), probs)
}

/// `E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2)`
pub fn chsh_value(rho: &DensityMatrix, settings: &SettingsSet) -> Result<f64> {
    if settings.m_a() != 2 || settings.m_b() != 2 {
        return Err(Error::OutOfRange(format!(
            "CHSH needs two settings per side, got {}x{}",
            settings.m_a(),
            settings.m_b()
        )));
    }
    let (a, b) = (settings.a(), settings.b());
    Ok(correlation(rho, &a[0], &b[0])? + correlation(rho, &a[0], &b[1])?
        + correlation(rho, &a[1], &b[0])?
        - correlation(rho, &a[1], &b[1])?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZbResult {
    pub violates: bool,
    /// Sum of the two largest squared singular values of `T`.
    pub value: f64,
}

/// Two-setting correlation criterion: `s1² + s2² > 1` over the singular
/// values of the correlation tensor.
pub fn zb_criterion(t: &[[f64; 3]; 3]) -> ZbResult {
    let mut tt = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            tt[i * 3 + j] = (0..3).map(|k| t[k][i] * t[k][j]).sum();
        }
    }
    // ascending eigenvalues of TᵀT are the squared singular values
    let ev = symmetric_eigenvalues(3, &tt).expect("TᵀT is symmetric");
    let value = ev[2].max(0.0) + ev[1].max(0.0);
    ZbResult {
        violates: value > 1.0 + 1e-12,
        value,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdBranch {
    /// `1/(√2 sin 2ξ)`
    First,
    /// `4/(4 + sin² 2ξ)`
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all_fields = "camelCase")]
pub enum ViolationThreshold {
    /// Some two-setting correlation inequality is violated for `p > p_star`.
    Attainable { p_star: f64, branch: ThresholdBranch },
    /// No admixture violates (product `|ψ_ξ>`).
    Unattainable,
}

impl ViolationThreshold {
    pub fn p_star(&self) -> Option<f64> {
        match self {
            Self::Attainable { p_star, .. } => Some(*p_star),
            Self::Unattainable => None,
        }
    }
}

fn first_branch(s: f64) -> f64 {
    1.0 / (SQRT_2 * s)
}

fn second_branch(s: f64) -> f64 {
    4.0 / (4.0 + s * s)
}

pub fn violation_threshold(xi: f64) -> Result<ViolationThreshold> {
    check_angle(xi)?;
    let s = (2.0 * xi.min(FRAC_PI_4)).sin();
    if s <= 0.0 {
        return Ok(ViolationThreshold::Unattainable);
    }
    let (b1, b2) = (first_branch(s), second_branch(s));
    let (p_star, branch) = if b1 <= b2 {
        (b1, ThresholdBranch::First)
    } else {
        (b2, ThresholdBranch::Second)
    };
    if p_star > 1.0 {
        return Ok(ViolationThreshold::Unattainable);
    }
    Ok(ViolationThreshold::Attainable { p_star, branch })
}

/// Angles in `(0, π/2)` where the two threshold branches are equal. Only the
/// first lies inside the family's `[0, π/4]`; the second is its mirror image
/// under `ξ -> π/2 - ξ`.
pub fn branch_crossings() -> (f64, f64) {
    let gap = |xi: f64| {
        let s = (2.0 * xi).sin();
        first_branch(s) - second_branch(s)
    };
    let bisect = |mut lo: f64, mut hi: f64| {
        let lo_sign = gap(lo) > 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (gap(mid) > 0.0) == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (bisect(1e-6, FRAC_PI_4), bisect(FRAC_PI_4, FRAC_PI_2 - 1e-6))
}
