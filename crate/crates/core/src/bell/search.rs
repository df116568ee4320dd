//! Restarted Nelder–Mead search over measurement directions minimizing the
//! critical visibility.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::polytope::{critical_visibility_with, LpOptions, VisibilityResult};
use super::{BehaviorTable, SettingsSet, MAX_SETTINGS};
use crate::error::{Error, Result};
use crate::quantum::{correlation_data, BlochVector, CorrelationData, DensityMatrix, Party};

/// Derivative-free simplex minimizer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMead {
    pub max_iter: usize,
    /// Stop once `max f - min f` over the simplex falls below this.
    pub tol: f64,
    /// Edge length of the initial simplex.
    pub step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-7,
            step: 0.4,
        }
    }
}

impl NelderMead {
    /// Returns the best vertex, its value and the number of evaluations.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> (Vec<f64>, f64, usize) {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let v0 = eval(x0, &mut evals);
        simplex.push((x0.to_vec(), v0));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.step;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }

        for _ in 0..self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[n].1 - simplex[0].1 < self.tol {
                break;
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let worst = simplex[n].clone();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(1.0);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            // shrink toward the best vertex
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = best
                    .iter()
                    .zip(&vertex.0)
                    .map(|(b, v)| b + 0.5 * (v - b))
                    .collect();
                let v = eval(&x, &mut evals);
                *vertex = (x, v);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, v) = simplex.swap_remove(0);
        (x, v, evals)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub restarts: usize,
    pub seed: u64,
    pub optimizer: NelderMead,
    /// Cap on `v` inside the objective. Above `1` the objective keeps
    /// decreasing toward the polytope boundary instead of flattening at `1`.
    pub objective_cap: f64,
    pub correlations_only: bool,
    /// Settings seeding restart 0; a shorter list is padded by repeating
    /// its last direction.
    pub warm_start: Option<SettingsSet>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            optimizer: NelderMead::default(),
            objective_cap: 10.0,
            correlations_only: false,
            warm_start: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    #[serde(rename = "vMin")]
    pub v_min: f64,
    pub restarts: usize,
    pub seed: u64,
    #[serde(rename = "bestRestart")]
    pub best_restart: usize,
    pub evaluations: usize,
    /// Recomputed at the best settings with `v <= 1`.
    pub visibility: VisibilityResult,
}

impl SearchResult {
    pub fn settings(&self) -> &SettingsSet {
        self.visibility
            .settings
            .as_ref()
            .expect("search results carry their settings")
    }
}

fn settings_from_angles(m_a: usize, angles: &[f64]) -> Result<SettingsSet> {
    let dirs: Vec<BlochVector> = angles
        .chunks_exact(2)
        .map(|c| BlochVector::from_angles(c[0], c[1]))
        .collect();
    let (a, b) = dirs.split_at(m_a);
    SettingsSet::new(a.to_vec(), b.to_vec())
}

fn table_from(data: &CorrelationData, settings: &SettingsSet) -> Result<BehaviorTable> {
    let la: Vec<f64> = settings.a().iter().map(|n| data.local(n, Party::A)).collect();
    let lb: Vec<f64> = settings.b().iter().map(|n| data.local(n, Party::B)).collect();
    let corr: Vec<Vec<f64>> = settings
        .a()
        .iter()
        .map(|a| settings.b().iter().map(|b| data.correlation(a, b)).collect())
        .collect();
    BehaviorTable::from_correlators(&la, &lb, &corr)
}

fn uniform_angles<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * count);
    for _ in 0..count {
        let u: f64 = rng.gen();
        let phi: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        out.push((1.0 - 2.0 * u).acos());
        out.push(phi);
    }
    out
}

fn padded_angles(list: &[BlochVector], m: usize) -> Result<Vec<f64>> {
    if list.len() > m {
        return Err(Error::DimensionMismatch(format!(
            "warm start has {} settings, search uses {m}",
            list.len()
        )));
    }
    let last = *list.last().expect("settings sets are non-empty");
    Ok(list
        .iter()
        .chain(std::iter::repeat_n(&last, m - list.len()))
        .flat_map(|n| {
            let (t, p) = n.to_angles();
            [t, p]
        })
        .collect())
}

/// Minimizes the critical visibility of `rho` over `m` settings per side.
pub fn optimize_settings(rho: &DensityMatrix, m: usize, restarts: usize, seed: u64) -> Result<SearchResult> {
    optimize_settings_with(
        rho,
        m,
        m,
        &SearchOptions {
            restarts,
            seed,
            ..SearchOptions::default()
        },
    )
}

pub fn optimize_settings_with(
    rho: &DensityMatrix,
    m_a: usize,
    m_b: usize,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    if m_a == 0 || m_b == 0 || m_a > MAX_SETTINGS || m_b > MAX_SETTINGS {
        return Err(Error::OutOfRange(format!(
            "{m_a}x{m_b} settings; allowed 1..={MAX_SETTINGS} per side"
        )));
    }
    if opts.restarts == 0 {
        return Err(Error::OutOfRange("at least one restart is required".into()));
    }
    super::polytope::strategy_count(m_a, m_b)?;
    let data = correlation_data(rho)?;
    let lp = LpOptions {
        correlations_only: opts.correlations_only,
        v_cap: opts.objective_cap,
    };
    let warm = match &opts.warm_start {
        Some(w) => {
            let mut x = padded_angles(w.a(), m_a)?;
            x.extend(padded_angles(w.b(), m_b)?);
            Some(x)
        }
        None => None,
    };

    let objective = |x: &[f64]| -> f64 {
        settings_from_angles(m_a, x)
            .and_then(|s| table_from(&data, &s))
            .and_then(|t| critical_visibility_with(&t, &lp))
            .map(|r| r.v_critical)
            .unwrap_or(lp.v_cap)
    };

    let runs: Vec<(usize, Vec<f64>, f64, usize)> = (0..opts.restarts)
        .into_par_iter()
        .map(|restart| {
            let x0 = match (&warm, restart) {
                (Some(w), 0) => w.clone(),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                    rng.set_stream(restart as u64);
                    uniform_angles(&mut rng, m_a + m_b)
                }
            };
            let (x, v, evals) = opts.optimizer.minimize(objective, &x0);
            (restart, x, v, evals)
        })
        .collect();

    let evaluations = runs.iter().map(|r| r.3).sum();
    let (best_restart, best_x, _, _) = runs
        .into_iter()
        .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)))
        .expect("at least one restart");

    let settings = settings_from_angles(m_a, &best_x)?;
    let table = table_from(&data, &settings)?;
    let mut visibility = critical_visibility_with(
        &table,
        &LpOptions {
            correlations_only: opts.correlations_only,
            v_cap: 1.0,
        },
    )?;
    visibility.settings = Some(settings);
    Ok(SearchResult {
        v_min: visibility.v_critical,
        restarts: opts.restarts,
        seed: opts.seed,
        best_restart,
        evaluations,
        visibility,
    })
}
