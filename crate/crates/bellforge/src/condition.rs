//! Correlation-tensor sufficient condition for non-violation.
//!
//! For mirror-symmetric XZ settings, each term's expectation factors into
//! a product of cosines and sines times one correlation-tensor entry whose
//! index is read off the term's pattern. Cauchy-Schwarz then bounds the
//! whole expression by the product of two Euclidean norms: the trig vector
//! (which has norm exactly 1 for a complete term set) and the vector of
//! tensor entries. A tensor-entry norm at most 1 therefore rules out any
//! violation with such settings.
//!
//! Two index conventions are in use. The published map sends PLUS to 1
//! (Pauli x) and MINUS to 3 (Pauli z), which matches half-sums along x.
//! This crate's mirror settings put the half-sum along z, so the bound
//! applies with the axes swapped; `swap_axes` converts between them.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::quantum::operator::apply_one_qubit;
use crate::quantum::{correlation_tensor, MixedState, PureState, QuantumState};
use crate::term::{BellInequality, Symbol};
use crate::Error;

/// One tensor index per term: entries over {0, 1, 3}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionIndexSet {
    indices: Vec<Vec<usize>>,
}

impl ConditionIndexSet {
    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    /// Exchanges Pauli x and z (1 <-> 3) in every tuple, converting
    /// between the x-primary published convention and the z-primary
    /// convention of this crate's mirror settings.
    pub fn swap_axes(&self) -> ConditionIndexSet {
        ConditionIndexSet {
            indices: self
                .indices
                .iter()
                .map(|t| {
                    t.iter()
                        .map(|&k| match k {
                            1 => 3,
                            3 => 1,
                            other => other,
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// Index tuples in term order: PLUS -> 1, MINUS -> 3, ZERO -> 0.
pub fn condition_indices(ineq: &BellInequality) -> ConditionIndexSet {
    let indices = ineq
        .terms()
        .iter()
        .map(|t| {
            (0..ineq.n())
                .map(|j| match t.pattern().symbol(j) {
                    Symbol::Plus => 1,
                    Symbol::Minus => 3,
                    Symbol::Zero => 0,
                })
                .collect()
        })
        .collect();
    ConditionIndexSet { indices }
}

/// Sum of squared tensor entries over the index set. At most 1 implies no
/// violation by mirror-symmetric settings whose primary axis matches the
/// index convention (see module docs).
pub fn condition_value(
    set: &ConditionIndexSet,
    state: &impl QuantumState,
) -> Result<f64, Error> {
    let mut total = 0.0;
    for idx in &set.indices {
        let t = correlation_tensor(state, idx)?;
        total += t * t;
    }
    Ok(total)
}

/// Haar-random single-qubit unitary from a uniform unit quaternion.
fn random_su2(rng: &mut impl Rng) -> [[Complex64; 2]; 2] {
    loop {
        let q: [f64; 4] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let norm_sq: f64 = q.iter().map(|x| x * x).sum();
        if norm_sq < 1e-6 || norm_sq > 1.0 {
            continue;
        }
        let s = norm_sq.sqrt();
        let (a, b, c, d) = (q[0] / s, q[1] / s, q[2] / s, q[3] / s);
        return [
            [Complex64::new(a, b), Complex64::new(c, d)],
            [Complex64::new(-c, d), Complex64::new(a, -b)],
        ];
    }
}

fn rotate_parts(state: &impl QuantumState, us: &[[[Complex64; 2]; 2]]) -> MixedState {
    let n = state.party_count();
    let parts = state
        .pure_parts()
        .into_iter()
        .map(|(p, psi)| {
            let mut amps = psi.amplitudes().to_vec();
            for (j, u) in us.iter().enumerate() {
                apply_one_qubit(n, j, u, &mut amps);
            }
            (p, PureState::new(n, amps).expect("unitary preserves norm"))
        })
        .collect();
    MixedState::new(parts).expect("probabilities unchanged")
}

/// Maximum of `condition_value` over sampled local frames. Each sampled
/// frame rotates every party by an independent Haar-random unitary; the
/// identity frame is always included. Returns (identity value, max over
/// all frames). Deterministic for a fixed seed.
pub fn condition_value_swept(
    set: &ConditionIndexSet,
    state: &impl QuantumState,
    frames: usize,
    seed: u64,
) -> Result<(f64, f64), Error> {
    let base = condition_value(set, state)?;
    let mut max = base;
    let n = state.party_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..frames {
        let us: Vec<[[Complex64; 2]; 2]> = (0..n).map(|_| random_su2(&mut rng)).collect();
        let rotated = rotate_parts(state, &us);
        max = max.max(condition_value(set, &rotated)?);
    }
    Ok((base, max))
}

/// Squared norm of the trig coefficient vector at per-party mirror
/// angles: per term, the product over live slots of cos^2 (PLUS) or
/// sin^2 (MINUS). Complete term sets give exactly 1 at every angle
/// combination; dropping terms can only shrink it.
pub fn trig_norm_sq(ineq: &BellInequality, phis: &[f64]) -> f64 {
    assert_eq!(phis.len(), ineq.n(), "one angle per party");
    let c2: Vec<f64> = phis.iter().map(|p| p.cos() * p.cos()).collect();
    ineq.terms()
        .iter()
        .map(|t| {
            (0..ineq.n())
                .map(|j| match t.pattern().symbol(j) {
                    Symbol::Plus => c2[j],
                    Symbol::Minus => 1.0 - c2[j],
                    Symbol::Zero => 1.0,
                })
                .product::<f64>()
        })
        .sum()
}

/// `trig_norm_sq` with one shared angle.
pub fn trig_norm_sq_uniform(ineq: &BellInequality, phi: f64) -> f64 {
    trig_norm_sq(ineq, &vec![phi; ineq.n()])
}
