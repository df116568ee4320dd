//! Local hidden variable models built from separable mixtures of product
//! qubit states, and a Monte-Carlo sampler that plays them round by round.
//!
//! In every model here the hidden variable is a component index; given the
//! component, each party answers with the single-qubit Born rule for its own
//! local state and setting. No code path on one side sees the other side's
//! setting.

use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{BlochVector, DensityMatrix, Party};
use crate::states::{check_angle, FamilyParams};

/// Identifier of the pseudorandom generator used by every sampler.
pub const GENERATOR_ID: &str = "rand_chacha::ChaCha8Rng/seed_from_u64+stream";

const WEIGHT_TOL: f64 = 1e-12;
const CHUNK_ROUNDS: u64 = 1 << 16;

/// Product of the qubit pure states with Bloch vectors `state_a`, `state_b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MimicComponent {
    pub weight: f64,
    pub state_a: BlochVector,
    pub state_b: BlochVector,
}

/// Weighted list of product projectors; separable by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableMimic {
    components: Vec<MimicComponent>,
}

impl SeparableMimic {
    pub fn new(components: Vec<MimicComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidState("mimic needs at least one component".into()));
        }
        let mut total = 0.0;
        for c in &components {
            if !(c.weight >= 0.0 && c.weight.is_finite()) {
                return Err(Error::InvalidState(format!("negative weight {}", c.weight)));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidState(format!("weights sum to {total}")));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[MimicComponent] {
        &self.components
    }

    /// Components with non-zero weight.
    pub fn support(&self) -> impl Iterator<Item = &MimicComponent> {
        self.components.iter().filter(|c| c.weight > 0.0)
    }

    pub fn density(&self) -> DensityMatrix {
        let parts: Vec<(f64, DensityMatrix)> = self
            .components
            .iter()
            .map(|c| (c.weight, c.state_a.density().tensor(&c.state_b.density())))
            .collect();
        let refs: Vec<(f64, &DensityMatrix)> = parts.iter().map(|(w, r)| (*w, r)).collect();
        DensityMatrix::mixture(&refs).expect("validated weights")
    }

    /// `Σ_λ w_λ (a·λ_A)(b·λ_B)`
    pub fn correlation(&self, a: &BlochVector, b: &BlochVector) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * a.dot(&c.state_a) * b.dot(&c.state_b))
            .sum()
    }

    pub fn local(&self, n: &BlochVector, party: Party) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let s = match party {
                    Party::A => &c.state_a,
                    Party::B => &c.state_b,
                };
                c.weight * n.dot(s)
            })
            .sum()
    }
}

/// `1/(1 + sin 2ξ)`: the largest admixture covered by [`mimic_state`].
pub fn lhv_validity_bound(xi: f64) -> Result<f64> {
    check_angle(xi)?;
    Ok(1.0 / (1.0 + (2.0 * xi).sin()))
}

/// Separable state reproducing every correlation of the `(p, ξ)` family.
///
/// Component table, with `s = sin 2ξ`:
///
/// | A  | B  | weight        |
/// |----|----|---------------|
/// | +x | -x | p s / 2       |
/// | -x | +x | p s / 2       |
/// | +y | -y | p s / 2       |
/// | -y | +y | p s / 2       |
/// | +z | -z | (p - p s) / 2 |
/// | -z | +z | (p - p s) / 2 |
/// | +z | +z | 1 - p - p s   |
///
/// This gives `T = diag(-p s, -p s, 1 - 2p)`; all weights are non-negative
/// exactly when `p <= 1/(1 + s)`.
pub fn mimic_state(params: FamilyParams) -> Result<SeparableMimic> {
    let bound = lhv_validity_bound(params.xi())?;
    let p = params.p();
    if p > bound {
        return Err(Error::Precondition(format!(
            "p = {p} exceeds the mimic validity bound {bound}"
        )));
    }
    let s = params.s();
    let (x, y, z) = (BlochVector::X, BlochVector::Y, BlochVector::Z);
    let half = 0.5 * p * s;
    let zpair = 0.5 * (p - p * s).max(0.0);
    let rest = (1.0 - p - p * s).max(0.0);
    let comp = |weight, state_a, state_b| MimicComponent {
        weight,
        state_a,
        state_b,
    };
    SeparableMimic::new(vec![
        comp(half, x, x.neg()),
        comp(half, x.neg(), x),
        comp(half, y, y.neg()),
        comp(half, y.neg(), y),
        comp(zpair, z, z.neg()),
        comp(zpair, z.neg(), z),
        comp(rest, z, z),
    ])
}

/// Anything that can be played as "draw a component, answer locally".
pub trait HiddenStateModel: Sync {
    fn hidden_states(&self) -> Vec<MimicComponent>;
}

impl HiddenStateModel for SeparableMimic {
    fn hidden_states(&self) -> Vec<MimicComponent> {
        self.components.clone()
    }
}

/// Mixture of a base model (probability `2q`) and the product state
/// `|z+>|z+>` answered with ordinary quantum rules (probability `1 - 2q`).
///
/// The base is the correlations-only mimic at `p = 1/2, ξ = π/4`. It
/// reproduces every correlation of the `q`-state and the local expectations
/// of equatorial settings. Whether some local model reproduces the remaining
/// local expectations of the `p = 1/2` state is an open question, so
/// non-equatorial marginals of this strategy are `(1 - 2q) n_z`, not
/// `(1 - q) n_z`. [`extension_statistics`] shows what the mixing step
/// produces from a base that does match them.
#[derive(Clone, Debug, PartialEq)]
pub struct LhvStrategy {
    q: f64,
    base: SeparableMimic,
}

impl LhvStrategy {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn base(&self) -> &SeparableMimic {
        &self.base
    }

    pub fn correlation(&self, a: &BlochVector, b: &BlochVector) -> f64 {
        2.0 * self.q * self.base.correlation(a, b) + (1.0 - 2.0 * self.q) * a.z * b.z
    }

    pub fn local(&self, n: &BlochVector, party: Party) -> f64 {
        2.0 * self.q * self.base.local(n, party) + (1.0 - 2.0 * self.q) * n.z
    }
}

impl HiddenStateModel for LhvStrategy {
    fn hidden_states(&self) -> Vec<MimicComponent> {
        let mut out: Vec<MimicComponent> = self
            .base
            .components()
            .iter()
            .map(|c| MimicComponent {
                weight: 2.0 * self.q * c.weight,
                ..*c
            })
            .collect();
        out.push(MimicComponent {
            weight: 1.0 - 2.0 * self.q,
            state_a: BlochVector::Z,
            state_b: BlochVector::Z,
        });
        out
    }
}

pub fn extend_model(q: f64) -> Result<LhvStrategy> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::OutOfRange(format!("q = {q} outside [0, 1/2]")));
    }
    let base = mimic_state(FamilyParams::singlet_mixture(0.5)?)?;
    Ok(LhvStrategy { q, base })
}

/// Correlation and both local expectations for one setting pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Statistics {
    pub correlation: f64,
    pub local_a: f64,
    pub local_b: f64,
}

/// Predictions of the `p = 1/2` singlet mixture:
/// `E(a,b) = -(a_x b_x + a_y b_y)/2`, `E(a) = a_z/2`, `E(b) = b_z/2`.
pub fn half_mixture_statistics(a: &BlochVector, b: &BlochVector) -> Statistics {
    Statistics {
        correlation: -0.5 * (a.x * b.x + a.y * b.y),
        local_a: 0.5 * a.z,
        local_b: 0.5 * b.z,
    }
}

/// Statistics of "base with probability `2q`, `|z+>|z+>` otherwise".
pub fn extension_statistics(q: f64, base: Statistics, a: &BlochVector, b: &BlochVector) -> Statistics {
    let w = 2.0 * q;
    Statistics {
        correlation: w * base.correlation + (1.0 - w) * a.z * b.z,
        local_a: w * base.local_a + (1.0 - w) * a.z,
        local_b: w * base.local_b + (1.0 - w) * b.z,
    }
}

/// `E_q(a,b) = -q(a_x b_x + a_y b_y) + (1-2q) a_z b_z`, `E_q(a) = (1-q) a_z`,
/// `E_q(b) = (1-q) b_z`.
pub fn extended_target(q: f64, a: &BlochVector, b: &BlochVector) -> Statistics {
    Statistics {
        correlation: -q * (a.x * b.x + a.y * b.y) + (1.0 - 2.0 * q) * a.z * b.z,
        local_a: (1.0 - q) * a.z,
        local_b: (1.0 - q) * b.z,
    }
}

/// One ±1 answer from the local quantum rule: `P(+1) = (1 + n·λ)/2`.
/// Takes only this party's hidden state and setting.
pub fn local_outcome<R: Rng + ?Sized>(hidden: &BlochVector, setting: &BlochVector, rng: &mut R) -> i8 {
    let p_plus = 0.5 * (1.0 + setting.dot(hidden));
    if rng.gen::<f64>() < p_plus {
        1
    } else {
        -1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LhvRound {
    pub round: u64,
    #[serde(rename = "lambdaIndex")]
    pub hidden_variable: usize,
    #[serde(rename = "outcomeA")]
    pub outcome_a: i8,
    #[serde(rename = "outcomeB")]
    pub outcome_b: i8,
}

/// Integer tallies; merging is exact and order-independent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    rounds: u64,
    sum_ab: i64,
    sum_a: i64,
    sum_b: i64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            rounds: self.rounds + o.rounds,
            sum_ab: self.sum_ab + o.sum_ab,
            sum_a: self.sum_a + o.sum_a,
            sum_b: self.sum_b + o.sum_b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub rounds: u64,
    pub correlation: f64,
    pub local_a: f64,
    pub local_b: f64,
    pub seed: u64,
    pub generator: String,
}

impl SampleStats {
    pub fn statistics(&self) -> Statistics {
        Statistics {
            correlation: self.correlation,
            local_a: self.local_a,
            local_b: self.local_b,
        }
    }
}

/// Generator for chunk `index`; independent of how chunks are scheduled.
pub fn chunk_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Prepared {
    states: Vec<MimicComponent>,
    picker: WeightedIndex<f64>,
}

impl Prepared {
    fn new<M: HiddenStateModel + ?Sized>(model: &M) -> Result<Self> {
        let states = model.hidden_states();
        let picker = WeightedIndex::new(states.iter().map(|c| c.weight))
            .map_err(|e| Error::InvalidState(format!("hidden-state weights: {e}")))?;
        Ok(Self { states, picker })
    }

    fn run_chunk(
        &self,
        a: &BlochVector,
        b: &BlochVector,
        seed: u64,
        index: u64,
        rounds: u64,
        mut log: Option<&mut dyn FnMut(LhvRound) -> Result<()>>,
    ) -> Result<Tally> {
        let mut rng = chunk_rng(seed, index);
        let mut t = Tally::default();
        for r in 0..rounds {
            let lambda = self.picker.sample(&mut rng);
            let h = &self.states[lambda];
            let oa = local_outcome(&h.state_a, a, &mut rng);
            let ob = local_outcome(&h.state_b, b, &mut rng);
            t.rounds += 1;
            t.sum_ab += i64::from(oa * ob);
            t.sum_a += i64::from(oa);
            t.sum_b += i64::from(ob);
            if let Some(f) = log.as_mut() {
                f(LhvRound {
                    round: index * CHUNK_ROUNDS + r,
                    hidden_variable: lambda,
                    outcome_a: oa,
                    outcome_b: ob,
                })?;
            }
        }
        Ok(t)
    }
}

fn chunk_sizes(n: u64) -> impl Iterator<Item = (u64, u64)> {
    let chunks = n.div_ceil(CHUNK_ROUNDS);
    (0..chunks).map(move |i| (i, CHUNK_ROUNDS.min(n - i * CHUNK_ROUNDS)))
}

fn finish(t: Tally, seed: u64) -> SampleStats {
    let n = t.rounds as f64;
    SampleStats {
        rounds: t.rounds,
        correlation: t.sum_ab as f64 / n,
        local_a: t.sum_a as f64 / n,
        local_b: t.sum_b as f64 / n,
        seed,
        generator: GENERATOR_ID.to_string(),
    }
}

/// Empirical `E(a,b)`, `E(a)`, `E(b)` over `n` rounds. Rounds are split into
/// fixed-size chunks with their own streams, so the result depends only on
/// `seed`, never on thread count.
pub fn sample_rounds<M: HiddenStateModel + ?Sized>(
    model: &M,
    a: &BlochVector,
    b: &BlochVector,
    n: u64,
    seed: u64,
) -> Result<SampleStats> {
    if n == 0 {
        return Err(Error::OutOfRange("need at least one round".into()));
    }
    let prep = Prepared::new(model)?;
    let chunks: Vec<(u64, u64)> = chunk_sizes(n).collect();
    let tally = chunks
        .par_iter()
        .map(|&(i, len)| prep.run_chunk(a, b, seed, i, len, None))
        .try_reduce(Tally::default, |x, y| Ok(x.merge(y)))?;
    Ok(finish(tally, seed))
}

/// Same as [`sample_rounds`], additionally writing one JSON line per round.
pub fn sample_rounds_logged<M: HiddenStateModel + ?Sized, W: Write>(
    model: &M,
    a: &BlochVector,
    b: &BlochVector,
    n: u64,
    seed: u64,
    out: &mut W,
) -> Result<SampleStats> {
    if n == 0 {
        return Err(Error::OutOfRange("need at least one round".into()));
    }
    let prep = Prepared::new(model)?;
    let mut tally = Tally::default();
    let mut sink = |r: LhvRound| -> Result<()> {
        serde_json::to_writer(&mut *out, &r)
            .map_err(|e| Error::Numerical(format!("round log: {e}")))?;
        out.write_all(b"\n")
            .map_err(|e| Error::Numerical(format!("round log: {e}")))
    };
    for (i, len) in chunk_sizes(n) {
        tally = tally.merge(prep.run_chunk(a, b, seed, i, len, Some(&mut sink))?);
    }
    Ok(finish(tally, seed))
}
