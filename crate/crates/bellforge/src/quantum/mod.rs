//! Qubit-state machinery: states, settings, implicit operators, extremal
//! eigenpairs, correlation tensors, and the Bloch-flip map.

pub mod eigen;
pub mod operator;
pub mod settings;
pub mod state;

pub use eigen::{max_eigenvalue, max_eigenvalue_with, EigenConfig, EigenOutcome};
pub use operator::{bloch_matrix, term_ops, TermOp};
pub use settings::{PartySettings, SettingSet};
pub use state::{psi2_printed_coefficients, psi2_state, MixedState, PureState, QuantumState};

use num_complex::Complex64;

use crate::term::BellInequality;
use crate::Error;

use operator::{apply_one_qubit, term_expectation, Mat2};

fn pauli(k: usize) -> Mat2 {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match k {
        1 => [[z, one], [one, z]],
        2 => [[z, -i], [i, z]],
        3 => [[one, z], [z, -one]],
        _ => panic!("pauli index must be 1, 2, or 3"),
    }
}

/// Correlation-tensor entry `T_index = <sigma_{k_1} x ... x sigma_{k_N}>`,
/// index entries in {0,1,2,3} with 0 the identity. The 4^N operator is
/// never formed; the Pauli string acts qubit-by-qubit.
pub fn correlation_tensor(state: &impl QuantumState, index: &[usize]) -> Result<f64, Error> {
    let n = state.party_count();
    if index.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: index.len(),
        });
    }
    if let Some(&bad) = index.iter().find(|&&k| k > 3) {
        return Err(Error::Parse(format!("tensor index {bad} outside 0..=3")));
    }
    let mut total = 0.0;
    for (p, psi) in state.pure_parts() {
        let mut work = psi.amplitudes().to_vec();
        for (j, &k) in index.iter().enumerate() {
            if k != 0 {
                apply_one_qubit(n, j, &pauli(k), &mut work);
            }
        }
        let e: Complex64 = psi
            .amplitudes()
            .iter()
            .zip(&work)
            .map(|(a, b)| a.conj() * b)
            .sum();
        total += p * e.re;
    }
    Ok(total)
}

/// Expression value on a state: per term, the convex mixture of pure-state
/// expectations is taken first, the modulus after, then terms are summed
/// in index order.
pub fn bell_value(
    ineq: &BellInequality,
    state: &impl QuantumState,
    settings: &SettingSet,
) -> Result<f64, Error> {
    let ops = term_ops(ineq, settings)?;
    let parts = state.pure_parts();
    let mut value = 0.0;
    for op in &ops {
        let mixed: f64 = parts
            .iter()
            .map(|(p, psi)| p * term_expectation(op, psi))
            .sum();
        value += mixed.abs();
    }
    Ok(value)
}

/// Bloch flip of every qubit: amplitude-wise conjugation composed with a
/// bitwise flip, `psi'[~b] = i^N (-1)^popcount(b) conj(psi[b])`. Every
/// Pauli expectation of weight w changes sign as (-1)^w.
pub fn not_map(state: &PureState) -> PureState {
    let n = state.n();
    let dim = 1usize << n;
    let phase = Complex64::new(0.0, 1.0).powu(n as u32);
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (b, amp) in state.amplitudes().iter().enumerate() {
        let sign = if (b.count_ones() & 1) == 1 { -1.0 } else { 1.0 };
        out[!b & (dim - 1)] = phase * sign * amp.conj();
    }
    PureState::new(n, out).expect("bloch flip preserves norm")
}

/// The even mixture of a state with its Bloch flip. Odd-weight tensor
/// entries cancel; even-weight entries survive unchanged.
pub fn not_mixture(state: &PureState) -> MixedState {
    MixedState::even_pair(state.clone(), not_map(state)).expect("two equal probabilities")
}
