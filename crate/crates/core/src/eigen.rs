//! Cyclic Jacobi eigenvalue solver for small dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then zeroes it with a real Givens rotation, so the working
//! matrix stays Hermitian throughout. Quadratic convergence sets in after a
//! few sweeps; at the sizes used here (up to 64x64) a handful of sweeps
//! reaches machine precision.

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

/// Hermiticity tolerance accepted on input.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_DIM: usize = 64;
const MAX_SWEEPS: usize = 100;

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n > MAX_DIM {
        return Err(Error::Unsupported(format!(
            "dimension {n} exceeds the dense solver cap of {MAX_DIM}"
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }

    // symmetrize so rounding in the input cannot leak into the diagonal
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        a[i * n + i] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            a[i * n + j] = z;
            a[j * n + i] = z.conj();
        }
    }

    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * scale {
            return Ok(sorted_diagonal(&a, n));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, n, p, q);
            }
        }
    }
    Err(Error::Numerical(format!(
        "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
    )))
}

fn sorted_diagonal(a: &[C64], n: usize) -> Vec<f64> {
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// Annihilate `a[p][q]` with `G = D·R`, `D = diag(.., e^{-iφ} at q, ..)`.
fn rotate(a: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    // skip pivots that are already negligible against both diagonal entries
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[p * n + q] = C64::new(0.0, 0.0);
        a[q * n + p] = C64::new(0.0, 0.0);
        return;
    }
    let phase = apq / r; // e^{iφ}
    let theta = 0.5 * (2.0 * r).atan2(aqq - app);
    let (s, c) = theta.sin_cos();
    let ph_conj = phase.conj();

    // A <- A G (columns p, q)
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q] * ph_conj;
        a[k * n + p] = akp * c - akq * s;
        a[k * n + q] = akp * s + akq * c;
    }
    // A <- G^† A (rows p, q)
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k] * phase;
        a[p * n + k] = apk * c - aqk * s;
        a[q * n + k] = apk * s + aqk * c;
    }
    a[p * n + q] = C64::new(0.0, 0.0);
    a[q * n + p] = C64::new(0.0, 0.0);
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;
}

/// Real symmetric convenience wrapper.
pub fn symmetric_eigenvalues(rows: usize, data: &[f64]) -> Result<Vec<f64>> {
    hermitian_eigenvalues(&ComplexMatrix::from_real(rows, rows, data)?)
}
