//! States, dichotomic qubit observables, bipartite structure and two-qubit
//! correlation extraction.
//!
//! Basis convention: computational basis with `|0...0>` first, qubit 1 is the
//! leftmost tensor factor and `σ_z|0> = +|0>`, so `|z+> = |0>`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::eigen::hermitian_eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::{tensor_product, tensor_vec, ComplexMatrix, C64, ONE, ZERO};

pub const NORM_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// One side of a bipartition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

/// Normalized state vector on `2^N` amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        check_qubit_dim(amplitudes.len())?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        check_qubit_dim(amplitudes.len())?;
        let norm = vec_norm(&amplitudes);
        if !(norm.is_finite() && norm > 1e-300) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::OutOfRange(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut v = vec![ZERO; dim];
        v[index] = ONE;
        Self::new(v)
    }

    /// `(|01> - |10>)/√2`
    pub fn singlet() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            amplitudes: vec![ZERO, h, -h, ZERO],
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|²`; global phases drop out.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: tensor_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_qubit_dim(dim: usize) -> Result<()> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "dimension {dim} is not a power of two >= 2"
        )));
    }
    Ok(())
}

/// Validated density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity (1e-12), unit trace (1e-12) and min eigenvalue >= -1e-10.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(
                "density matrix must be square".into(),
            ));
        }
        let defect = matrix.hermiticity_defect();
        if defect > NORM_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix)?[0];
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Convex combination `Σ w_i ρ_i`; weights must be non-negative and sum to 1.
    pub fn mixture(components: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut total = 0.0;
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, rho) in components {
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidState(format!("mixture weight {w} is negative")));
            }
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch("mixture of unequal dimensions".into()));
            }
            total += w;
            acc = &acc + &rho.matrix.scale_real(*w);
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("mixture weights sum to {total}")));
        }
        Ok(Self { matrix: acc })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `Re Tr[ρ O]`
    pub fn expectation(&self, observable: &ComplexMatrix) -> Result<f64> {
        if observable.rows() != self.dim() || observable.cols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "observable {}x{} on a {}-dimensional state",
                observable.rows(),
                observable.cols(),
                self.dim()
            )));
        }
        Ok(self.matrix.trace_product_re(observable))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: tensor_product(&self.matrix, &other.matrix),
        }
    }

    /// `U ρ U†`
    pub fn conjugate_by(&self, unitary: &ComplexMatrix) -> Result<DensityMatrix> {
        if unitary.rows() != self.dim() || !unitary.is_square() {
            return Err(Error::DimensionMismatch("unitary size".into()));
        }
        Ok(DensityMatrix {
            matrix: &(unitary * &self.matrix) * &unitary.adjoint(),
        })
    }
}

/// Real unit 3-vector parameterising the observable `n·σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const X: BlochVector = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: BlochVector = BlochVector { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n2 = x * x + y * y + z * z;
        if !n2.is_finite() || (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotUnit(n2.sqrt()));
        }
        Ok(Self { x, y, z })
    }

    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotUnit(n));
        }
        Ok(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Polar angle `theta` from +z, azimuth `phi` from +x.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    pub fn to_angles(&self) -> (f64, f64) {
        (self.z.clamp(-1.0, 1.0).acos(), self.y.atan2(self.x))
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn dot3(&self, v: &[f64; 3]) -> f64 {
        self.x * v[0] + self.y * v[1] + self.z * v[2]
    }

    pub fn neg(&self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Projector `(I ± n·σ)/2` onto outcome `sign`.
    pub fn projector(&self, sign: i8) -> ComplexMatrix {
        let s = f64::from(sign.signum());
        let obs = pauli_observable(self);
        let mut m = ComplexMatrix::identity(2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = (m[(i, j)] + obs[(i, j)] * s) * 0.5;
            }
        }
        m
    }

    /// Qubit pure state whose Bloch vector is `self`.
    pub fn pure_state(&self) -> PureState {
        let (theta, phi) = self.to_angles();
        let (s, c) = (0.5 * theta).sin_cos();
        PureState {
            amplitudes: vec![C64::new(c, 0.0), C64::from_polar(s, phi)],
        }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.projector(1),
        }
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("static shape")
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO])
        .expect("static shape")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[1.0, -1.0])
}

pub fn paulis() -> [ComplexMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// `n_x σ_x + n_y σ_y + n_z σ_z`
pub fn pauli_observable(n: &BlochVector) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = C64::new(n.z, 0.0);
    m[(1, 1)] = C64::new(-n.z, 0.0);
    m[(0, 1)] = C64::new(n.x, -n.y);
    m[(1, 0)] = C64::new(n.x, n.y);
    m
}

fn check_bipartite(dim: usize, (da, db): (usize, usize)) -> Result<()> {
    if da == 0 || db == 0 || da * db != dim {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions {da}x{db} do not factor {dim}"
        )));
    }
    Ok(())
}

/// Partial transpose of an arbitrary square operator on `C^dA ⊗ C^dB`.
pub fn partial_transpose_matrix(
    m: &ComplexMatrix,
    dims: (usize, usize),
    party: Party,
) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("partial transpose needs a square matrix".into()));
    }
    check_bipartite(m.rows(), dims)?;
    let (da, db) = dims;
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    // <i j| M |k l>
                    let v = m[(i * db + j, k * db + l)];
                    let (r, c) = match party {
                        Party::A => (k * db + j, i * db + l),
                        Party::B => (i * db + l, k * db + j),
                    };
                    out[(r, c)] = v;
                }
            }
        }
    }
    Ok(out)
}

pub fn partial_transpose(
    rho: &DensityMatrix,
    dims: (usize, usize),
    party: Party,
) -> Result<ComplexMatrix> {
    partial_transpose_matrix(&rho.matrix, dims, party)
}

/// Reduced state of the kept party.
pub fn partial_trace(
    rho: &DensityMatrix,
    dims: (usize, usize),
    keep: Party,
) -> Result<DensityMatrix> {
    check_bipartite(rho.dim(), dims)?;
    let (da, db) = dims;
    let m = &rho.matrix;
    let reduced = match keep {
        Party::A => {
            let mut r = ComplexMatrix::zeros(da, da);
            for i in 0..da {
                for k in 0..da {
                    r[(i, k)] = (0..db).map(|j| m[(i * db + j, k * db + j)]).sum();
                }
            }
            r
        }
        Party::B => {
            let mut r = ComplexMatrix::zeros(db, db);
            for j in 0..db {
                for l in 0..db {
                    r[(j, l)] = (0..da).map(|i| m[(i * db + j, i * db + l)]).sum();
                }
            }
            r
        }
    };
    Ok(DensityMatrix { matrix: reduced })
}

/// Reduced state of qubit `index` (0 = leftmost) of an N-qubit pure state.
pub fn single_qubit_reduced(psi: &PureState, index: usize) -> Result<DensityMatrix> {
    let n = psi.num_qubits();
    if index >= n {
        return Err(Error::OutOfRange(format!("qubit {index} of {n}")));
    }
    let bit = 1usize << (n - 1 - index);
    let amps = psi.amplitudes();
    let mut r = ComplexMatrix::zeros(2, 2);
    for (idx, a) in amps.iter().enumerate() {
        if idx & bit != 0 {
            continue;
        }
        let b = amps[idx | bit];
        r[(0, 0)] += a * a.conj();
        r[(0, 1)] += a * b.conj();
        r[(1, 0)] += b * a.conj();
        r[(1, 1)] += b * b.conj();
    }
    Ok(DensityMatrix { matrix: r })
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// `Tr[ρ (a·σ ⊗ b·σ)]`
pub fn correlation(rho: &DensityMatrix, a: &BlochVector, b: &BlochVector) -> Result<f64> {
    require_two_qubit(rho)?;
    let obs = tensor_product(&pauli_observable(a), &pauli_observable(b));
    rho.expectation(&obs)
}

/// `Tr[ρ (n·σ ⊗ I)]` or `Tr[ρ (I ⊗ n·σ)]`.
pub fn local_expectation(rho: &DensityMatrix, n: &BlochVector, party: Party) -> Result<f64> {
    require_two_qubit(rho)?;
    let i2 = ComplexMatrix::identity(2);
    let obs = match party {
        Party::A => tensor_product(&pauli_observable(n), &i2),
        Party::B => tensor_product(&i2, &pauli_observable(n)),
    };
    rho.expectation(&obs)
}

/// Full two-qubit statistics in tensor form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationData {
    /// `T[i][j] = Tr[ρ σ_i ⊗ σ_j]`
    pub tensor: [[f64; 3]; 3],
    pub local_a: [f64; 3],
    pub local_b: [f64; 3],
}

impl CorrelationData {
    /// `aᵀ T b`
    pub fn correlation(&self, a: &BlochVector, b: &BlochVector) -> f64 {
        let a = a.components();
        let b = b.components();
        (0..3)
            .map(|i| a[i] * (0..3).map(|j| self.tensor[i][j] * b[j]).sum::<f64>())
            .sum()
    }

    pub fn local(&self, n: &BlochVector, party: Party) -> f64 {
        match party {
            Party::A => n.dot3(&self.local_a),
            Party::B => n.dot3(&self.local_b),
        }
    }
}

pub fn correlation_data(rho: &DensityMatrix) -> Result<CorrelationData> {
    require_two_qubit(rho)?;
    let s = paulis();
    let i2 = ComplexMatrix::identity(2);
    let mut tensor = [[0.0; 3]; 3];
    let mut local_a = [0.0; 3];
    let mut local_b = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            tensor[i][j] = rho.expectation(&tensor_product(&s[i], &s[j]))?;
        }
        local_a[i] = rho.expectation(&tensor_product(&s[i], &i2))?;
        local_b[i] = rho.expectation(&tensor_product(&i2, &s[i]))?;
    }
    Ok(CorrelationData {
        tensor,
        local_a,
        local_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_plus() -> DensityMatrix {
        BlochVector::Z.density()
    }

    #[test]
    fn pauli_observable_basics() {
        assert_eq!(pauli_observable(&BlochVector::Z), pauli_z());
        assert_eq!(pauli_observable(&BlochVector::X), pauli_x());
        let n = BlochVector::normalized(0.3, -0.4, 0.5).unwrap();
        let o = pauli_observable(&n);
        assert!((&o * &o).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn bloch_constructor_rejects_non_unit() {
        assert!(matches!(BlochVector::new(1.0, 1.0, 0.0), Err(Error::NotUnit(_))));
        assert!(BlochVector::normalized(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn pure_state_of_bloch_vector_matches_projector() {
        let n = BlochVector::normalized(-0.2, 0.7, -0.1).unwrap();
        let rho = n.pure_state().projector();
        assert!(rho.matrix().max_abs_diff(&n.projector(1)) < 1e-14);
    }

    #[test]
    fn singlet_partial_transpose_spectrum() {
        let rho = PureState::singlet().projector();
        for party in [Party::A, Party::B] {
            let pt = partial_transpose(&rho, (2, 2), party).unwrap();
            let ev = hermitian_eigenvalues(&pt).unwrap();
            for (e, want) in ev.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
                assert!((e - want).abs() < 1e-14, "{ev:?}");
            }
        }
    }

    #[test]
    fn product_state_partial_transpose_is_psd() {
        let a = BlochVector::normalized(0.1, 0.9, -0.3).unwrap().density();
        let b = BlochVector::normalized(-0.5, 0.2, 0.8).unwrap().density();
        let pt = partial_transpose(&a.tensor(&b), (2, 2), Party::B).unwrap();
        assert!(hermitian_eigenvalues(&pt).unwrap()[0] > -1e-14);
    }

    #[test]
    fn partial_trace_cases() {
        let a = BlochVector::normalized(0.1, 0.9, -0.3).unwrap().density();
        let b = BlochVector::normalized(-0.5, 0.2, 0.8).unwrap().density();
        let ra = partial_trace(&a.tensor(&b), (2, 2), Party::A).unwrap();
        assert!(ra.matrix().max_abs_diff(a.matrix()) < 1e-15);
        let rb = partial_trace(&a.tensor(&b), (2, 2), Party::B).unwrap();
        assert!(rb.matrix().max_abs_diff(b.matrix()) < 1e-15);

        let s = PureState::singlet().projector();
        let r = partial_trace(&s, (2, 2), Party::A).unwrap();
        assert!(r.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_errors() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(partial_transpose(&rho, (2, 3), Party::A).is_err());
        assert!(partial_trace(&rho, (3, 1), Party::B).is_err());
        let big = DensityMatrix::maximally_mixed(8);
        assert!(correlation(&big, &BlochVector::Z, &BlochVector::Z).is_err());
        assert!(local_expectation(&big, &BlochVector::Z, Party::A).is_err());
        assert!(correlation_data(&big).is_err());
    }

    #[test]
    fn singlet_correlation_tensor() {
        let cd = correlation_data(&PureState::singlet().projector()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { -1.0 } else { 0.0 };
                assert!((cd.tensor[i][j] - want).abs() < 1e-15);
            }
            assert!(cd.local_a[i].abs() < 1e-15 && cd.local_b[i].abs() < 1e-15);
        }
    }

    #[test]
    fn product_z_plus_statistics() {
        let rho = z_plus().tensor(&z_plus());
        assert!((correlation(&rho, &BlochVector::Z, &BlochVector::Z).unwrap() - 1.0).abs() < 1e-15);
        assert!((local_expectation(&rho, &BlochVector::Z, Party::B).unwrap() - 1.0).abs() < 1e-15);
        let cd = correlation_data(&rho).unwrap();
        assert_eq!(cd.local_a, [0.0, 0.0, 1.0]);
        assert_eq!(cd.local_b, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = ComplexMatrix::identity(2);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = ComplexMatrix::diagonal(&[1.5, -0.5]);
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm = ComplexMatrix::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(matches!(DensityMatrix::new(non_herm), Err(Error::NotHermitian(_))));
        assert!(DensityMatrix::new(ComplexMatrix::diagonal(&[0.25; 4])).is_ok());
    }

    #[test]
    fn pure_state_validation() {
        assert!(PureState::new(vec![ONE, ONE]).is_err());
        assert!(PureState::new(vec![ONE, ZERO, ZERO]).is_err());
        assert!(PureState::normalized(vec![ZERO, ZERO]).is_err());
        let p = PureState::normalized(vec![ONE, ONE]).unwrap();
        assert!((p.fidelity(&p) - 1.0).abs() < 1e-15);
        assert!(PureState::basis(2, 4).is_err());
    }

    #[test]
    fn single_qubit_reduced_matches_partial_trace() {
        let s = PureState::singlet();
        let r0 = single_qubit_reduced(&s, 0).unwrap();
        let r1 = single_qubit_reduced(&s, 1).unwrap();
        let pa = partial_trace(&s.projector(), (2, 2), Party::A).unwrap();
        let pb = partial_trace(&s.projector(), (2, 2), Party::B).unwrap();
        assert!(r0.matrix().max_abs_diff(pa.matrix()) < 1e-15);
        assert!(r1.matrix().max_abs_diff(pb.matrix()) < 1e-15);
    }
}
