//! Critical white-noise visibility of a behavior with respect to the local
//! polytope spanned by deterministic strategies.
//!
//! A no-signaling behavior with dichotomic outcomes is fixed by its
//! marginals `E(a_x)`, `E(b_y)` and correlators `E(a_x, b_y)`, and white
//! noise has all of them zero. Matching `Σ_λ q_λ P_λ = v P + (1-v)/4` entry
//! by entry is therefore the same as matching
//! `Σ_λ q_λ (1, A_λ(x), B_λ(y), A_λ(x) B_λ(y)) = (1, v E(a_x), v E(b_y), v E(a_x,b_y))`,
//! which is the form the LP uses.

use serde::{Deserialize, Serialize};

use super::simplex::{self, LinearProgram};
use super::{BehaviorTable, SettingsSet};
use crate::error::{Error, Result};

/// Largest strategy count `2^(m_A + m_B)` accepted.
pub const MAX_STRATEGIES: usize = 4096;
/// Reconstruction and separation tolerance of certificates.
pub const LP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpOptions {
    /// Constrain correlators only and leave marginals free.
    pub correlations_only: bool,
    /// Upper bound on `v`. `1` gives the critical visibility proper; larger
    /// values also report how far inside the polytope a local behavior sits.
    pub v_cap: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            correlations_only: false,
            v_cap: 1.0,
        }
    }
}

pub fn strategy_count(m_a: usize, m_b: usize) -> Result<usize> {
    let bits = m_a + m_b;
    if bits >= usize::BITS as usize || (1usize << bits) > MAX_STRATEGIES {
        return Err(Error::Unsupported(format!(
            "2^{bits} deterministic strategies exceed the cap of {MAX_STRATEGIES}"
        )));
    }
    Ok(1usize << bits)
}

/// `A_λ(x)`: bit `x` of `λ` clear means `+1`.
fn outcome_a(lambda: usize, x: usize) -> f64 {
    if lambda >> x & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn outcome_b(lambda: usize, m_a: usize, y: usize) -> f64 {
    outcome_a(lambda, m_a + y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyWeight {
    pub strategy: usize,
    pub outcomes_a: Vec<i8>,
    pub outcomes_b: Vec<i8>,
    pub weight: f64,
}

/// `Σ_x g_A[x] E(a_x) + Σ_y g_B[y] E(b_y) + Σ_xy g_AB[x][y] E(a_x,b_y) <= local_bound`
/// holds for every local model; the tested behavior reaches `quantum_value`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatingInequality {
    pub coeff_a: Vec<f64>,
    pub coeff_b: Vec<f64>,
    pub coeff_ab: Vec<Vec<f64>>,
    pub local_bound: f64,
    pub quantum_value: f64,
}

impl SeparatingInequality {
    pub fn evaluate(&self, local_a: &[f64], local_b: &[f64], corr: &dyn Fn(usize, usize) -> f64) -> f64 {
        let mut v: f64 = self.coeff_a.iter().zip(local_a).map(|(g, e)| g * e).sum();
        v += self.coeff_b.iter().zip(local_b).map(|(g, e)| g * e).sum::<f64>();
        for (x, row) in self.coeff_ab.iter().enumerate() {
            for (y, g) in row.iter().enumerate() {
                v += g * corr(x, y);
            }
        }
        v
    }

    /// Maximum over all deterministic strategies, by enumeration.
    pub fn enumerate_local_bound(&self) -> f64 {
        let (m_a, m_b) = (self.coeff_a.len(), self.coeff_b.len());
        let mut best = f64::NEG_INFINITY;
        for lambda in 0..(1usize << (m_a + m_b)) {
            let la: Vec<f64> = (0..m_a).map(|x| outcome_a(lambda, x)).collect();
            let lb: Vec<f64> = (0..m_b).map(|y| outcome_b(lambda, m_a, y)).collect();
            let v = self.evaluate(&la, &lb, &|x, y| la[x] * lb[y]);
            best = best.max(v);
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "certificateType", content = "certificate")]
pub enum Certificate {
    /// Weights over deterministic strategies reproducing the table at `vCritical`.
    LocalDecomposition(Vec<StrategyWeight>),
    /// A Bell inequality violated by the table.
    SeparatingInequality(SeparatingInequality),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityResult {
    #[serde(rename = "vCritical")]
    pub v_critical: f64,
    #[serde(rename = "mA")]
    pub m_a: usize,
    #[serde(rename = "mB")]
    pub m_b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<SettingsSet>,
    #[serde(rename = "correlationsOnly")]
    pub correlations_only: bool,
    #[serde(flatten)]
    pub certificate: Certificate,
}

impl VisibilityResult {
    pub fn is_local(&self) -> bool {
        matches!(self.certificate, Certificate::LocalDecomposition(_))
    }
}

/// Critical visibility with marginals included and `0 <= v <= 1`.
pub fn critical_visibility(table: &BehaviorTable) -> Result<VisibilityResult> {
    critical_visibility_with(table, &LpOptions::default())
}

pub fn critical_visibility_with(table: &BehaviorTable, opts: &LpOptions) -> Result<VisibilityResult> {
    let (m_a, m_b) = (table.m_a(), table.m_b());
    let n_strat = strategy_count(m_a, m_b)?;
    if !(opts.v_cap >= 1.0 && opts.v_cap.is_finite()) {
        return Err(Error::OutOfRange(format!("v cap {} must be >= 1", opts.v_cap)));
    }

    // feature layout: [A(x)..., B(y)...]? then A(x)B(y) row-major
    let with_marginals = !opts.correlations_only;
    let n_marg = if with_marginals { m_a + m_b } else { 0 };
    let n_feat = n_marg + m_a * m_b;
    let features = |lambda: usize| -> Vec<f64> {
        let mut f = Vec::with_capacity(n_feat);
        if with_marginals {
            f.extend((0..m_a).map(|x| outcome_a(lambda, x)));
            f.extend((0..m_b).map(|y| outcome_b(lambda, m_a, y)));
        }
        for x in 0..m_a {
            for y in 0..m_b {
                f.push(outcome_a(lambda, x) * outcome_b(lambda, m_a, y));
            }
        }
        f
    };
    let mut target = Vec::with_capacity(n_feat);
    if with_marginals {
        target.extend((0..m_a).map(|x| table.local_a(x)));
        target.extend((0..m_b).map(|y| table.local_b(y)));
    }
    for x in 0..m_a {
        for y in 0..m_b {
            target.push(table.correlator(x, y));
        }
    }

    // v = 0 with uniform weights must be feasible
    let mut mean = vec![0.0; n_feat];
    let strategy_features: Vec<Vec<f64>> = (0..n_strat).map(features).collect();
    for f in &strategy_features {
        for (m, v) in mean.iter_mut().zip(f) {
            *m += v / n_strat as f64;
        }
    }
    if mean.iter().any(|m| m.abs() > 1e-12) {
        return Err(Error::Numerical("uniform mixture is not the noise point".into()));
    }

    // columns: q_0..q_{N-1}, v, slack; rows: norm, features, v + s = cap
    let rows = 1 + n_feat + 1;
    let cols = n_strat + 2;
    let v_col = n_strat;
    let mut a = vec![0.0; rows * cols];
    let mut b = vec![0.0; rows];
    for (lambda, f) in strategy_features.iter().enumerate() {
        a[lambda] = 1.0;
        for (k, val) in f.iter().enumerate() {
            a[(1 + k) * cols + lambda] = *val;
        }
    }
    b[0] = 1.0;
    for (k, t) in target.iter().enumerate() {
        a[(1 + k) * cols + v_col] = -t;
    }
    a[(rows - 1) * cols + v_col] = 1.0;
    a[(rows - 1) * cols + v_col + 1] = 1.0;
    b[rows - 1] = opts.v_cap;
    let mut c = vec![0.0; cols];
    c[v_col] = 1.0;

    let sol = simplex::solve(&LinearProgram::new(rows, cols, a, b, c)?)?;
    let v = sol.x[v_col].clamp(0.0, opts.v_cap);

    let certificate = if v >= 1.0 - LP_TOL {
        let weights = sol.x[..n_strat]
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(lambda, &weight)| StrategyWeight {
                strategy: lambda,
                outcomes_a: (0..m_a).map(|x| outcome_a(lambda, x) as i8).collect(),
                outcomes_b: (0..m_b).map(|y| outcome_b(lambda, m_a, y) as i8).collect(),
                weight,
            })
            .collect();
        Certificate::LocalDecomposition(weights)
    } else {
        // Dual feasibility gives y_0 + y·r_λ >= 0 for every strategy and
        // -y·e >= 1 at the optimum, so g = -y separates.
        let g: Vec<f64> = sol.duals[1..1 + n_feat].iter().map(|y| -y).collect();
        let (coeff_a, coeff_b) = if with_marginals {
            (g[..m_a].to_vec(), g[m_a..n_marg].to_vec())
        } else {
            (vec![0.0; m_a], vec![0.0; m_b])
        };
        let coeff_ab: Vec<Vec<f64>> = (0..m_a)
            .map(|x| g[n_marg + x * m_b..n_marg + (x + 1) * m_b].to_vec())
            .collect();
        let mut ineq = SeparatingInequality {
            coeff_a,
            coeff_b,
            coeff_ab,
            local_bound: 0.0,
            quantum_value: 0.0,
        };
        ineq.local_bound = ineq.enumerate_local_bound();
        ineq.quantum_value = g.iter().zip(&target).map(|(x, t)| x * t).sum();
        Certificate::SeparatingInequality(ineq)
    };

    Ok(VisibilityResult {
        v_critical: v,
        m_a,
        m_b,
        settings: None,
        correlations_only: opts.correlations_only,
        certificate,
    })
}

/// Re-checks a certificate against the table from scratch.
///
/// Returns the largest reconstruction residual for a decomposition, or the
/// separation margin `value - local bound` for an inequality.
pub fn audit_certificate(table: &BehaviorTable, result: &VisibilityResult) -> Result<f64> {
    if (table.m_a(), table.m_b()) != (result.m_a, result.m_b) {
        return Err(Error::DimensionMismatch("certificate and table shapes differ".into()));
    }
    let (m_a, m_b) = (result.m_a, result.m_b);
    match &result.certificate {
        Certificate::LocalDecomposition(weights) => {
            let total: f64 = weights.iter().map(|w| w.weight).sum();
            if weights.iter().any(|w| w.weight < -1e-12) || (total - 1.0).abs() > LP_TOL {
                return Err(Error::Numerical(format!(
                    "decomposition weights invalid (sum {total})"
                )));
            }
            let scaled = table.with_visibility(result.v_critical);
            let mut worst = 0.0f64;
            for x in 0..m_a {
                for y in 0..m_b {
                    let mut rebuilt = [0.0; 4];
                    for w in weights {
                        let (oa, ob) = (w.outcomes_a[x], w.outcomes_b[y]);
                        let idx = 2 * usize::from(oa < 0) + usize::from(ob < 0);
                        rebuilt[idx] += w.weight;
                    }
                    if result.correlations_only {
                        let e = rebuilt[0] - rebuilt[1] - rebuilt[2] + rebuilt[3];
                        let want = result.v_critical * table.correlator(x, y);
                        worst = worst.max((e - want).abs());
                    } else {
                        for (r, p) in rebuilt.iter().zip(scaled.slice(x, y)) {
                            worst = worst.max((r - p).abs());
                        }
                    }
                }
            }
            if worst > LP_TOL {
                return Err(Error::Numerical(format!(
                    "decomposition residual {worst:e} exceeds {LP_TOL:e}"
                )));
            }
            Ok(worst)
        }
        Certificate::SeparatingInequality(ineq) => {
            let la: Vec<f64> = (0..m_a).map(|x| table.local_a(x)).collect();
            let lb: Vec<f64> = (0..m_b).map(|y| table.local_b(y)).collect();
            let value = ineq.evaluate(&la, &lb, &|x, y| table.correlator(x, y));
            let bound = ineq.enumerate_local_bound();
            let margin = value - bound;
            if margin <= LP_TOL {
                return Err(Error::Numerical(format!(
                    "inequality does not separate (margin {margin:e})"
                )));
            }
            Ok(margin)
        }
    }
}
