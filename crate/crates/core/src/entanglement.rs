//! Entanglement detection: the PPT test, product-state recognition for pure
//! N-qubit states, superpositions of `|0...0>` with a product state, and the
//! support-plane argument for `ε|ψ_ent><ψ_ent| + (1-ε)|0...0><0...0|`.

use serde::{Deserialize, Serialize};

use crate::eigen::hermitian_eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::{C64, ONE, ZERO};
use crate::quantum::{
    partial_transpose, single_qubit_reduced, DensityMatrix, Party, PureState,
};
use crate::states::{werner_state, WernerParams};

/// Witness values below `-PPT_TOL` count as entangled.
pub const PPT_TOL: f64 = 1e-10;
/// A reduced state is pure when its largest eigenvalue is at least `1 - PURITY_TOL`.
pub const PURITY_TOL: f64 = 1e-10;
/// Coefficients `|k_j|` at or below this are zero.
pub const COEFF_CUTOFF: f64 = 1e-9;

const PARAM_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementVerdict {
    pub entangled: bool,
    /// Minimum eigenvalue of the partial transpose.
    pub witness_value: f64,
    pub tolerance: f64,
}

/// Minimum eigenvalue of `ρ^{T_B}`.
pub fn ppt_witness(rho: &DensityMatrix, dims: (usize, usize)) -> Result<f64> {
    let pt = partial_transpose(rho, dims, Party::B)?;
    Ok(hermitian_eigenvalues(&pt)?[0])
}

/// PPT test; necessary and sufficient for 2x2 and 2x3 systems.
pub fn ppt_verdict(rho: &DensityMatrix, dims: (usize, usize)) -> Result<EntanglementVerdict> {
    let witness_value = ppt_witness(rho, dims)?;
    Ok(EntanglementVerdict {
        entangled: witness_value < -PPT_TOL,
        witness_value,
        tolerance: PPT_TOL,
    })
}

/// `|Ψ> = a ⊗_j f_j` with each factor `f_j` either `(1, k_j)` or `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductDecomposition {
    pub normalization: C64,
    pub factors: Vec<[C64; 2]>,
    pub is_product: bool,
}

impl ProductDecomposition {
    fn entangled() -> Self {
        Self {
            normalization: ZERO,
            factors: Vec::new(),
            is_product: false,
        }
    }

    /// `k_j`, or `None` when factor `j` is `|1>` and has no `|0> + k|1>` form.
    pub fn coefficients(&self) -> Vec<Option<C64>> {
        self.factors
            .iter()
            .map(|f| if f[0] == ZERO { None } else { Some(f[1] / f[0]) })
            .collect()
    }

    pub fn reconstruct(&self) -> Option<PureState> {
        if !self.is_product {
            return None;
        }
        let mut amps = vec![self.normalization];
        for f in &self.factors {
            amps = crate::matrix::tensor_vec(&amps, f);
        }
        PureState::normalized(amps).ok()
    }
}

/// Recognizes product states by purity of every single-qubit reduction and
/// returns the factors when the test passes.
pub fn is_product_pure(psi: &PureState, num_qubits: usize) -> Result<ProductDecomposition> {
    if psi.dim() != 1usize << num_qubits {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} is not {num_qubits} qubits",
            psi.dim()
        )));
    }
    for q in 0..num_qubits {
        let ev = hermitian_eigenvalues(single_qubit_reduced(psi, q)?.matrix())?;
        if ev[1] < 1.0 - PURITY_TOL {
            return Ok(ProductDecomposition::entangled());
        }
    }

    // Slice every factor through the largest amplitude.
    let amps = psi.amplitudes();
    let pivot = (0..amps.len())
        .max_by(|&i, &j| amps[i].norm_sqr().total_cmp(&amps[j].norm_sqr()))
        .expect("non-empty state");
    let mut factors = Vec::with_capacity(num_qubits);
    let mut denom = ONE;
    for q in 0..num_qubits {
        let bit = 1usize << (num_qubits - 1 - q);
        let f0 = amps[pivot & !bit];
        let f1 = amps[pivot | bit];
        let factor = if f0.norm() >= 1e-12 * f1.norm() {
            [ONE, f1 / f0]
        } else {
            [ZERO, ONE]
        };
        denom *= if pivot & bit != 0 { factor[1] } else { factor[0] };
        factors.push(factor);
    }
    Ok(ProductDecomposition {
        normalization: amps[pivot] / denom,
        factors,
        is_product: true,
    })
}

/// Outcome of the product-superposition dichotomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma1Class {
    /// At most one `k_j` is non-zero: the superposition is a product state
    /// for every `α, β`.
    ProductForAll,
    /// At least two `k_j` are non-zero and both terms are present.
    EntangledForAll,
    /// `α ∈ {0, 1}` or `β = 0`.
    Trivial,
}

/// Normalized `a ⊗_j (|0> + k_j|1>)`.
pub fn product_from_coefficients(k: &[C64]) -> Result<PureState> {
    if k.is_empty() {
        return Err(Error::DimensionMismatch("need at least one qubit".into()));
    }
    let mut amps = vec![ONE];
    for kj in k {
        amps = crate::matrix::tensor_vec(&amps, &[ONE, *kj]);
    }
    PureState::normalized(amps)
}

/// `α|0...0> + β|Ψ>` for `|Ψ>` built from `k`, normalized.
pub fn lemma1_superposition(alpha: C64, beta: C64, k: &[C64]) -> Result<PureState> {
    let psi = product_from_coefficients(k)?;
    let mut amps: Vec<C64> = psi.amplitudes().iter().map(|z| z * beta).collect();
    amps[0] += alpha;
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < PARAM_EPS {
        return Err(Error::InvalidState(
            "superposition vanishes and cannot be normalized".into(),
        ));
    }
    PureState::normalized(amps)
}

pub fn lemma1_classify(alpha: C64, beta: C64, k: &[C64]) -> Result<Lemma1Class> {
    // validates normalizability as a side effect
    lemma1_superposition(alpha, beta, k)?;
    let nonzero = k.iter().filter(|z| z.norm() > COEFF_CUTOFF).count();
    if nonzero <= 1 {
        return Ok(Lemma1Class::ProductForAll);
    }
    if alpha.norm() < PARAM_EPS || (alpha - ONE).norm() < PARAM_EPS || beta.norm() < PARAM_EPS {
        return Ok(Lemma1Class::Trivial);
    }
    Ok(Lemma1Class::EntangledForAll)
}

/// Intermediate quantities of the entanglement check for
/// `ε|ψ_ent><ψ_ent| + (1-ε)|0...0><0...0|`.
#[derive(Clone, Debug, PartialEq)]
pub struct Theorem2Report {
    pub entangled: bool,
    /// Whether the only candidate partner of `|0...0>` in a two-term
    /// separable decomposition is itself a product vector.
    pub partner_is_product: bool,
    /// Smallest PT eigenvalue over the contiguous cuts `1..k | k+1..N`.
    pub min_cut_witness: f64,
}

pub fn theorem2_mixture(epsilon: f64, psi_ent: &PureState) -> Result<DensityMatrix> {
    let zero = PureState::basis(psi_ent.num_qubits(), 0)?.projector();
    DensityMatrix::mixture(&[(epsilon, &psi_ent.projector()), (1.0 - epsilon, &zero)])
}

pub fn theorem2_report(epsilon: f64, psi_ent: &PureState, num_qubits: usize) -> Result<Theorem2Report> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::OutOfRange(format!("ε = {epsilon} outside [0, 1]")));
    }
    if !(2..=5).contains(&num_qubits) {
        return Err(Error::Unsupported(format!(
            "support argument implemented for 2..=5 qubits, got {num_qubits}"
        )));
    }
    if is_product_pure(psi_ent, num_qubits)?.is_product {
        return Err(Error::Precondition("ψ_ent is a product state".into()));
    }
    let rho = theorem2_mixture(epsilon, psi_ent)?;

    let mut min_cut_witness = f64::INFINITY;
    for cut in 1..num_qubits {
        let dims = (1usize << cut, 1usize << (num_qubits - cut));
        min_cut_witness = min_cut_witness.min(ppt_witness(&rho, dims)?);
    }

    if epsilon == 0.0 {
        return Ok(Theorem2Report {
            entangled: false,
            partner_is_product: true,
            min_cut_witness,
        });
    }

    // ψ_ent = a|0> + b|0⊥>, b > 0 since ψ_ent is not |0...0>.
    let amps = psi_ent.amplitudes();
    let mut perp: Vec<C64> = amps.to_vec();
    perp[0] = ZERO;
    let b = perp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut perp {
        *z /= b;
    }

    // Restriction of ρ to the support plane S = span{|0>, |0⊥>}.
    let m = rho.matrix();
    let rho_perp: Vec<C64> = m.apply(&perp);
    let rho_01 = rho_perp[0];
    let rho_11: C64 = perp.iter().zip(&rho_perp).map(|(u, v)| u.conj() * v).sum();

    // ρ = (1-λ)|0><0| + λ|Ψ2><Ψ2| forces Ψ2 ∝ ρ_01|0> + ρ_11|0⊥>.
    let mut partner: Vec<C64> = perp.iter().map(|z| z * rho_11).collect();
    partner[0] += rho_01;
    let partner = PureState::normalized(partner)?;
    let partner_is_product = is_product_pure(&partner, num_qubits)?.is_product;

    Ok(Theorem2Report {
        entangled: !partner_is_product,
        partner_is_product,
        min_cut_witness,
    })
}

/// Entanglement of `ε|ψ_ent><ψ_ent| + (1-ε)|0...0><0...0|`: the PPT verdict
/// for two qubits, the support-plane argument for up to five.
pub fn theorem2_verify(epsilon: f64, psi_ent: &PureState, num_qubits: usize) -> Result<bool> {
    let report = theorem2_report(epsilon, psi_ent, num_qubits)?;
    if num_qubits == 2 {
        let rho = theorem2_mixture(epsilon, psi_ent)?;
        return Ok(ppt_verdict(&rho, (2, 2))?.entangled);
    }
    Ok(report.entangled)
}

pub fn werner_ppt_witness(d: usize, p: f64) -> Result<f64> {
    let rho = werner_state(WernerParams::new(d, p)?);
    ppt_witness(&rho, (d, d))
}

/// Bisection for the sign change of the Werner PPT witness, `d` in `2..=4`.
pub fn werner_entanglement_boundary(d: usize) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if werner_ppt_witness(d, lo)? < 0.0 || werner_ppt_witness(d, hi)? >= 0.0 {
        return Err(Error::Numerical("PPT witness does not bracket a root".into()));
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if werner_ppt_witness(d, mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
