//! Dense two-phase primal simplex for `max cᵀx  s.t.  A x = b, x >= 0`.
//!
//! Pricing is Dantzig's most-negative reduced cost; after a run of
//! degenerate pivots the solver switches to Bland's smallest-index rule,
//! which cannot cycle. Artificial columns stay in the tableau through phase
//! two so that row duals can be read off the objective row at the end.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct LinearProgram {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl LinearProgram {
    /// `a` is row-major `rows x cols`.
    pub fn new(rows: usize, cols: usize, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.len() != rows * cols || b.len() != rows || c.len() != cols || rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("inconsistent LP dimensions".into()));
        }
        if a.iter().chain(&b).chain(&c).any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite LP data".into()));
        }
        Ok(Self { rows, cols, a, b, c })
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One dual value per equality row: `y = c_B B⁻¹`.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

struct Tableau {
    m: usize,
    n: usize,
    width: usize,
    t: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

enum Pricing {
    Dantzig,
    Bland,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let pv = self.t[row * w + col];
        for j in 0..w {
            self.t[row * w + j] /= pv;
        }
        let pivot_row: Vec<f64> = self.t[row * w..(row + 1) * w].to_vec();
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let f = self.t[i * w + col];
            if f != 0.0 {
                let r = &mut self.t[i * w..(i + 1) * w];
                for (x, p) in r.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
                r[col] = 0.0;
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (x, p) in self.obj.iter_mut().zip(&pivot_row) {
                *x -= f * p;
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Runs to optimality over columns `0..allowed`.
    fn optimize(&mut self, allowed: usize) -> Result<()> {
        let mut pricing = Pricing::Dantzig;
        let mut degenerate = 0usize;
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Numerical(format!(
                    "simplex exceeded {MAX_PIVOTS} pivots"
                )));
            }
            let entering = match pricing {
                Pricing::Dantzig => {
                    let mut best = None;
                    let mut best_val = -PIVOT_TOL;
                    for j in 0..allowed {
                        if self.obj[j] < best_val {
                            best_val = self.obj[j];
                            best = Some(j);
                        }
                    }
                    best
                }
                Pricing::Bland => (0..allowed).find(|&j| self.obj[j] < -PIVOT_TOL),
            };
            let Some(col) = entering else {
                return Ok(());
            };

            let w = self.width;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let aij = self.t[i * w + col];
                if aij > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / aij;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((row, ratio)) = leave else {
                return Err(Error::Numerical("LP is unbounded".into()));
            };
            if ratio <= 1e-12 {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN {
                    pricing = Pricing::Bland;
                }
            } else {
                degenerate = 0;
                pricing = Pricing::Dantzig;
            }
            self.pivot(row, col);
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let (m, n) = (lp.rows, lp.cols);
    let width = n + m + 1;
    let mut t = vec![0.0; m * width];
    let mut sign = vec![1.0; m];
    for i in 0..m {
        if lp.b[i] < 0.0 {
            sign[i] = -1.0;
        }
        for j in 0..n {
            t[i * width + j] = sign[i] * lp.a[i * n + j];
        }
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = sign[i] * lp.b[i];
    }

    // Phase one: maximize -Σ artificials.
    let mut obj = vec![0.0; width];
    for i in 0..m {
        for j in 0..n {
            obj[j] -= t[i * width + j];
        }
        obj[width - 1] -= t[i * width + width - 1];
    }
    let mut tab = Tableau {
        m,
        n,
        width,
        t,
        obj,
        basis: (n..n + m).collect(),
        pivots: 0,
    };
    tab.optimize(n)?;
    let infeasibility = -tab.obj[width - 1];
    let scale = 1.0 + lp.b.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if infeasibility > FEAS_TOL * scale {
        return Err(Error::Numerical(format!(
            "LP is infeasible (phase-one residual {infeasibility:e})"
        )));
    }

    // Drive basic artificials out where a structural column can replace them.
    for i in 0..m {
        if tab.basis[i] >= n {
            let col = (0..n).find(|&j| tab.t[i * width + j].abs() > 1e-9);
            if let Some(j) = col {
                tab.pivot(i, j);
            }
        }
    }

    // Phase two objective row: d_j = Σ c_B T_ij - c_j.
    let cost = |j: usize| if j < n { lp.c[j] } else { 0.0 };
    let mut obj = vec![0.0; width];
    for (j, o) in obj.iter_mut().enumerate().take(width - 1) {
        *o = -cost(j);
    }
    for i in 0..m {
        let cb = cost(tab.basis[i]);
        if cb != 0.0 {
            for (o, t) in obj.iter_mut().zip(&tab.t[i * width..(i + 1) * width]) {
                *o += cb * t;
            }
        }
    }
    tab.obj = obj;
    tab.optimize(n)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).max(0.0);
        }
    }
    let objective = x.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
    let duals = (0..m).map(|i| sign[i] * tab.obj[tab.n + i]).collect();
    Ok(LpSolution {
        x,
        objective,
        duals,
        pivots: tab.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(rows: usize, cols: usize, a: &[f64], b: &[f64], c: &[f64]) -> LinearProgram {
        LinearProgram::new(rows, cols, a.to_vec(), b.to_vec(), c.to_vec()).unwrap()
    }

    #[test]
    fn small_textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 (slacks s1..s3)
        let p = lp(
            3,
            5,
            &[
                1.0, 0.0, 1.0, 0.0, 0.0, //
                0.0, 2.0, 0.0, 1.0, 0.0, //
                3.0, 2.0, 0.0, 0.0, 1.0,
            ],
            &[4.0, 12.0, 18.0],
            &[3.0, 5.0, 0.0, 0.0, 0.0],
        );
        let s = solve(&p).unwrap();
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        // strong duality: bᵀy equals the optimum
        let by: f64 = [4.0, 12.0, 18.0].iter().zip(&s.duals).map(|(b, y)| b * y).sum();
        assert!((by - 36.0).abs() < 1e-12);
        assert!((s.duals[0]).abs() < 1e-12);
        assert!((s.duals[1] - 1.5).abs() < 1e-12);
        assert!((s.duals[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // -x - y = -2 (twice), max x; optimum x = 2
        let p = lp(2, 2, &[-1.0, -1.0, -1.0, -1.0], &[-2.0, -2.0], &[1.0, 0.0]);
        let s = solve(&p).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
        let by: f64 = s.duals.iter().map(|y| -2.0 * y).sum();
        assert!((by - 2.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let inf = lp(2, 1, &[1.0, 1.0], &[1.0, 2.0], &[1.0]);
        assert!(matches!(solve(&inf), Err(Error::Numerical(_))));
        let unb = lp(1, 2, &[1.0, -1.0], &[0.0], &[1.0, 0.0]);
        assert!(matches!(solve(&unb), Err(Error::Numerical(_))));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(LinearProgram::new(1, 2, vec![1.0], vec![1.0], vec![1.0, 1.0]).is_err());
        assert!(LinearProgram::new(1, 1, vec![f64::NAN], vec![1.0], vec![1.0]).is_err());
    }
}
