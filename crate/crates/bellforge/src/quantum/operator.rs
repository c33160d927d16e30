//! Term operators and matrix-free application of the full expression.
//!
//! Each term maps to `coeff * F_1 x ... x F_N` where slot symbols pick the
//! factor: a sign slot takes the half-sum or half-difference observable of
//! that party, a zero slot takes the identity. The coefficient folds the
//! term weight with one factor of 2 per non-zero slot, so catalog terms all
//! carry coefficient 1. The 2^N x 2^N operator is never materialized;
//! applying it walks the amplitude vector once per non-identity factor.

use num_complex::Complex64;

use super::settings::SettingSet;
use super::state::PureState;
use crate::term::{BellInequality, SignPattern, Symbol};
use crate::Error;

pub type Mat2 = [[Complex64; 2]; 2];

/// `v . sigma` for a Bloch vector `v` (not necessarily unit length).
pub fn bloch_matrix(v: [f64; 3]) -> Mat2 {
    let [x, y, z] = v;
    [
        [Complex64::new(z, 0.0), Complex64::new(x, -y)],
        [Complex64::new(x, y), Complex64::new(-z, 0.0)],
    ]
}

/// One term as an operator: per-party factor (None = identity) and the
/// folded scalar coefficient.
#[derive(Debug, Clone)]
pub struct TermOp {
    factors: Vec<Option<Mat2>>,
    coeff: f64,
}

impl TermOp {
    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn factors(&self) -> &[Option<Mat2>] {
        &self.factors
    }

    /// Operator norm: `coeff` times the product of factor Bloch lengths.
    pub fn norm(&self) -> f64 {
        let mut out = self.coeff.abs();
        for f in self.factors.iter().flatten() {
            // Row norm of v.sigma recovers |v| exactly.
            let z = f[0][0].re;
            let xy = f[0][1].norm();
            out *= (z * z + xy * xy).sqrt();
        }
        out
    }
}

fn term_op(n: usize, pattern: &SignPattern, weight_f64: f64, s: &SettingSet) -> TermOp {
    let mut factors = Vec::with_capacity(n);
    let mut nonzero = 0u32;
    for j in 0..n {
        factors.push(match pattern.symbol(j) {
            Symbol::Plus => {
                nonzero += 1;
                Some(bloch_matrix(s.party(j).half_sum()))
            }
            Symbol::Minus => {
                nonzero += 1;
                Some(bloch_matrix(s.party(j).half_diff()))
            }
            Symbol::Zero => None,
        });
    }
    TermOp {
        factors,
        coeff: weight_f64 * f64::from(1u32 << nonzero),
    }
}

/// Builds every term operator, in term index order.
pub fn term_ops(ineq: &BellInequality, settings: &SettingSet) -> Result<Vec<TermOp>, Error> {
    if settings.party_count() != ineq.n() {
        return Err(Error::DimensionMismatch {
            expected: ineq.n(),
            got: settings.party_count(),
        });
    }
    let n = ineq.n();
    Ok(ineq
        .terms()
        .iter()
        .map(|t| {
            let w = *t.weight().numer() as f64 / *t.weight().denom() as f64;
            term_op(n, t.pattern(), w, settings)
        })
        .collect())
}

/// Applies a single-qubit operator at party `j` in place. Party `j`
/// occupies bit `n-1-j` of the basis index.
pub fn apply_one_qubit(n: usize, j: usize, m: &Mat2, v: &mut [Complex64]) {
    debug_assert_eq!(v.len(), 1 << n);
    let stride = 1usize << (n - 1 - j);
    let dim = v.len();
    let mut base = 0;
    while base < dim {
        for i0 in base..base + stride {
            let i1 = i0 | stride;
            let a = v[i0];
            let b = v[i1];
            v[i0] = m[0][0] * a + m[0][1] * b;
            v[i1] = m[1][0] * a + m[1][1] * b;
        }
        base += 2 * stride;
    }
}

/// `out += scale * (T v)` for one term `T`, using `scratch` as workspace.
pub fn accumulate_term(
    op: &TermOp,
    scale: f64,
    v: &[Complex64],
    scratch: &mut [Complex64],
    out: &mut [Complex64],
) {
    let n = op.factors.len();
    scratch.copy_from_slice(v);
    for (j, f) in op.factors.iter().enumerate() {
        if let Some(m) = f {
            apply_one_qubit(n, j, m, scratch);
        }
    }
    let c = Complex64::new(scale * op.coeff, 0.0);
    for (o, s) in out.iter_mut().zip(scratch.iter()) {
        *o += c * *s;
    }
}

/// `<psi| T |psi>` for one term. Real because every factor is Hermitian.
pub fn term_expectation(op: &TermOp, psi: &PureState) -> f64 {
    let n = op.factors.len();
    let mut work = psi.amplitudes().to_vec();
    for (j, f) in op.factors.iter().enumerate() {
        if let Some(m) = f {
            apply_one_qubit(n, j, m, &mut work);
        }
    }
    let inner: Complex64 = psi
        .amplitudes()
        .iter()
        .zip(&work)
        .map(|(a, b)| a.conj() * b)
        .sum();
    op.coeff * inner.re
}

/// Applies the signed sum `O = sum_t signs[t] * coeff_t * T_t` to `v`,
/// accumulating serially in term index order.
pub fn signed_sum_apply(
    ops: &[TermOp],
    signs: &[i8],
    v: &[Complex64],
    scratch: &mut [Complex64],
    out: &mut [Complex64],
) {
    debug_assert_eq!(ops.len(), signs.len());
    out.fill(Complex64::new(0.0, 0.0));
    for (op, &s) in ops.iter().zip(signs) {
        accumulate_term(op, f64::from(s), v, scratch, out);
    }
}

/// Dense matrix of the signed sum, for small-system cross-checks.
pub fn signed_sum_dense(n: usize, ops: &[TermOp], signs: &[i8]) -> Vec<Vec<Complex64>> {
    let dim = 1usize << n;
    let mut cols = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    for (k, col) in cols.iter_mut().enumerate() {
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        e[k] = Complex64::new(1.0, 0.0);
        signed_sum_apply(ops, signs, &e, &mut scratch, col);
    }
    // Transpose columns into row-major order.
    let mut rows = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (k, col) in cols.iter().enumerate() {
        for (r, val) in col.iter().enumerate() {
            rows[r][k] = *val;
        }
    }
    rows
}
