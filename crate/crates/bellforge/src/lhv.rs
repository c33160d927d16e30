//! Exact local-hidden-variable certification by exhaustive enumeration.
//!
//! A deterministic local strategy assigns `±1` to both observables of every
//! party; the `4^N` strategies are the vertices of the correlation polytope.
//! Certification never samples and never touches floating point: weights are
//! scaled to a common integer denominator and every vertex value accumulates
//! in 128-bit integers.
//!
//! The enumeration exploits the bracket structure. Under an assignment, the
//! term's bracket product is nonzero only when the agreement string
//! `s_j = A_1^j A_2^j` matches the term's signs on its support, and then
//! equals `2^(N-zeros) * prod_(support) A_1^j`. Grouping vertices by
//! agreement string turns the inner loop over terms into a lookup of the few
//! terms covering that string.

use rayon::prelude::*;

use crate::term::{Assignment, BellInequality, SignPattern, Symbol};
use crate::{Error, Rational, MAX_CERTIFY_N};

/// Exact vertex extremes of one inequality.
///
/// `signed_min` / `signed_max` bound the plain signed expression (every term
/// entering with its `+` prefix); `max_abs` is the requested form's maximum:
/// the per-term-modulus (wrapped) value when `wrapped` is set, otherwise
/// `max(|signed_min|, |signed_max|)`. Witnesses are the lowest-code
/// assignments attaining each extreme.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub wrapped: bool,
    pub max_abs: Rational,
    pub signed_min: Rational,
    pub signed_max: Rational,
    /// True when the signed expression is exactly `±bound` on every vertex.
    pub is_mirror: bool,
    pub witness_abs: Assignment,
    pub witness_min: Assignment,
    pub witness_max: Assignment,
    /// Number of vertices enumerated, `4^N`.
    pub assignments: u64,
}

/// Outcome of the mirror test: signed value `±bound` everywhere, with the
/// count of vertices on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MirrorReport {
    pub is_mirror: bool,
    pub plus_count: u64,
    pub minus_count: u64,
    pub assignments: u64,
}

/// The rank-one `3^N` tensor attached to one polytope vertex: party `j`
/// contributes the vector `(A_1^j, A_2^j, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexTensor {
    n: usize,
    entries: Vec<i64>,
}

impl VertexTensor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at a per-party index tuple; indices run over `{1, 2, 3}` where
    /// 1 picks `A_1`, 2 picks `A_2`, and 3 picks the constant 1.
    pub fn entry(&self, index: &[usize]) -> Result<i64, Error> {
        if index.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: index.len(),
            });
        }
        let mut flat = 0usize;
        for &i in index {
            if !(1..=3).contains(&i) {
                return Err(Error::Parse(format!("tensor index {i} outside 1..=3")));
            }
            flat = flat * 3 + (i - 1);
        }
        Ok(self.entries[flat])
    }

    /// Contracts the tensor against a term's coefficient pattern: a PLUS
    /// slot selects entries 1 and 2 with coefficients (1, 1), MINUS selects
    /// them with (1, -1), ZERO selects entry 3. Equals `evaluate_term` of
    /// the pattern on the underlying assignment.
    pub fn contract(&self, pattern: &SignPattern) -> Result<i64, Error> {
        if pattern.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: pattern.len(),
            });
        }
        let mut total = 0i64;
        for flat in 0..self.entries.len() {
            let mut coeff = 1i64;
            let mut rest = flat;
            for j in (0..self.n).rev() {
                let i = rest % 3;
                rest /= 3;
                coeff *= match (pattern.symbol(j), i) {
                    (Symbol::Plus, 0) | (Symbol::Plus, 1) => 1,
                    (Symbol::Minus, 0) => 1,
                    (Symbol::Minus, 1) => -1,
                    (Symbol::Zero, 2) => 1,
                    _ => 0,
                };
                if coeff == 0 {
                    break;
                }
            }
            total += coeff * self.entries[flat];
        }
        Ok(total)
    }
}

/// Builds the factorizable vertex tensor of an assignment.
pub fn vertex_tensor(a: &Assignment) -> VertexTensor {
    let n = a.n();
    let mut entries = vec![1i64; 3usize.pow(n as u32)];
    for (flat, e) in entries.iter_mut().enumerate() {
        let mut rest = flat;
        for j in (0..n).rev() {
            let i = rest % 3;
            rest /= 3;
            *e *= match i {
                0 => a.a1(j),
                1 => a.a2(j),
                _ => 1,
            };
        }
    }
    VertexTensor { n, entries }
}

// Integer-scaled view of an inequality: weights multiplied by the common
// denominator so every vertex value is an exact i128.
struct Scaled {
    n: usize,
    // Per agreement string: (scaled coefficient D*w*2^(N-zeros), support mask)
    // of each covering term.
    cover: Vec<Vec<(i128, u32)>>,
    // Per agreement string: the wrapped vertex value (it does not depend on
    // the A_1 half of the assignment).
    wrapped_value: Vec<i128>,
    denom: i64,
    // bound * denom, exact.
    bound_num: i128,
    bound_den: i128,
}

fn scale(ineq: &BellInequality) -> Result<Scaled, Error> {
    let n = ineq.n();
    let mut denom: i64 = 1;
    for t in ineq.terms() {
        let q = *t.weight().denom();
        let g = num::integer::gcd(denom, q);
        denom = (denom / g).checked_mul(q).ok_or_else(|| {
            Error::Parse("weight denominators exceed the supported range".into())
        })?;
    }
    let mut cover: Vec<Vec<(i128, u32)>> = vec![Vec::new(); 1 << n];
    let mut wrapped_value = vec![0i128; 1 << n];
    for t in ineq.terms() {
        let w = t.weight();
        let scaled = (denom / w.denom()) as i128 * *w.numer() as i128;
        let coeff = scaled << (n - t.pattern().zeros());
        let supp: u32 = t
            .pattern()
            .symbols()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != Symbol::Zero)
            .map(|(j, _)| 1u32 << j)
            .sum();
        for m in t.pattern().covered_masks() {
            cover[m as usize].push((coeff, supp));
            wrapped_value[m as usize] += coeff;
        }
    }
    Ok(Scaled {
        n,
        cover,
        wrapped_value,
        denom,
        bound_num: *ineq.bound().numer() as i128 * denom as i128,
        bound_den: *ineq.bound().denom() as i128,
    })
}

#[derive(Clone, Copy)]
struct Partial {
    signed_min: i128,
    min_code: u32,
    signed_max: i128,
    max_code: u32,
    wrapped_max: i128,
    abs_code: u32,
    mirror: bool,
    plus: u64,
    minus: u64,
}

impl Partial {
    fn empty() -> Self {
        Partial {
            signed_min: i128::MAX,
            min_code: u32::MAX,
            signed_max: i128::MIN,
            max_code: u32::MAX,
            wrapped_max: i128::MIN,
            abs_code: u32::MAX,
            mirror: true,
            plus: 0,
            minus: 0,
        }
    }

    // Ties resolve to the lower assignment code, making the reduction
    // independent of chunking.
    fn merge(a: Partial, b: Partial) -> Partial {
        let pick_max = |va: i128, ca: u32, vb: i128, cb: u32| -> (i128, u32) {
            if vb > va || (vb == va && cb < ca) {
                (vb, cb)
            } else {
                (va, ca)
            }
        };
        let pick_min = |va: i128, ca: u32, vb: i128, cb: u32| -> (i128, u32) {
            if vb < va || (vb == va && cb < ca) {
                (vb, cb)
            } else {
                (va, ca)
            }
        };
        let (signed_min, min_code) = pick_min(a.signed_min, a.min_code, b.signed_min, b.min_code);
        let (signed_max, max_code) = pick_max(a.signed_max, a.max_code, b.signed_max, b.max_code);
        let (wrapped_max, abs_code) = pick_max(a.wrapped_max, a.abs_code, b.wrapped_max, b.abs_code);
        Partial {
            signed_min,
            min_code,
            signed_max,
            max_code,
            wrapped_max,
            abs_code,
            mirror: a.mirror && b.mirror,
            plus: a.plus + b.plus,
            minus: a.minus + b.minus,
        }
    }
}

fn sweep_range(sc: &Scaled, from: u64, to: u64) -> Partial {
    let n = sc.n;
    let low_mask = (1u32 << n) - 1;
    let mut p = Partial::empty();
    for code in from..to {
        let code = code as u32;
        let a1 = code & low_mask;
        let a2 = code >> n;
        let s = (a1 ^ a2) as usize;
        let mut signed = 0i128;
        for &(coeff, supp) in &sc.cover[s] {
            if (a1 & supp).count_ones() & 1 == 1 {
                signed -= coeff;
            } else {
                signed += coeff;
            }
        }
        if signed < p.signed_min {
            p.signed_min = signed;
            p.min_code = code;
        }
        if signed > p.signed_max {
            p.signed_max = signed;
            p.max_code = code;
        }
        let wrapped = sc.wrapped_value[s];
        if wrapped > p.wrapped_max {
            p.wrapped_max = wrapped;
            p.abs_code = code;
        }
        // signed/denom == ±bound  <=>  signed * bound_den == ±bound_num.
        let lhs = signed * sc.bound_den;
        if lhs == sc.bound_num {
            p.plus += 1;
        } else if lhs == -sc.bound_num {
            p.minus += 1;
        } else {
            p.mirror = false;
        }
    }
    p
}

fn sweep(ineq: &BellInequality) -> Result<(Scaled, Partial), Error> {
    let n = ineq.n();
    if n > MAX_CERTIFY_N {
        return Err(Error::BadPartyCount {
            n,
            min: 2,
            max: MAX_CERTIFY_N,
        });
    }
    let sc = scale(ineq)?;
    let total = 1u64 << (2 * n);
    let chunk = (total / 256).max(1 << 12).min(total);
    let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
    let partial = starts
        .par_iter()
        .map(|&from| sweep_range(&sc, from, (from + chunk).min(total)))
        .reduce(Partial::empty, Partial::merge);
    Ok((sc, partial))
}

fn to_rational(scaled: i128, denom: i64) -> Rational {
    let num = i64::try_from(scaled).expect("vertex value exceeds i64 range");
    Rational::new(num, denom)
}

/// Certifies the vertex bound of an inequality, exactly.
///
/// With `wrapped` set, `max_abs` is the maximum of the per-term-modulus
/// expression; otherwise it is the larger magnitude of the signed extremes.
/// Both signed extremes are always reported.
pub fn certify_bound(ineq: &BellInequality, wrapped: bool) -> Result<BoundReport, Error> {
    let n = ineq.n();
    let (sc, p) = sweep(ineq)?;
    let signed_min = to_rational(p.signed_min, sc.denom);
    let signed_max = to_rational(p.signed_max, sc.denom);
    let (max_abs, witness_abs) = if wrapped {
        (to_rational(p.wrapped_max, sc.denom), p.abs_code)
    } else if -p.signed_min > p.signed_max
        || (-p.signed_min == p.signed_max && p.min_code < p.max_code)
    {
        (-signed_min, p.min_code)
    } else {
        (signed_max, p.max_code)
    };
    Ok(BoundReport {
        wrapped,
        max_abs,
        signed_min,
        signed_max,
        is_mirror: p.mirror,
        witness_abs: Assignment::new(n, witness_abs),
        witness_min: Assignment::new(n, p.min_code),
        witness_max: Assignment::new(n, p.max_code),
        assignments: 1 << (2 * n),
    })
}

/// Tests the mirror property: the signed expression must be exactly `+bound`
/// or `-bound` on every vertex. When true, each side holds exactly half of
/// the `4^N` vertices.
pub fn mirror_check(ineq: &BellInequality) -> Result<MirrorReport, Error> {
    let (_, p) = sweep(ineq)?;
    Ok(MirrorReport {
        is_mirror: p.mirror,
        plus_count: p.plus,
        minus_count: p.minus,
        assignments: 1 << (2 * ineq.n()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{catalog_entry, drop_extremes, pair_reduce, wwwzb_seed};
    use crate::term::{evaluate_term, BellTerm};

    fn pat(s: &str) -> SignPattern {
        s.parse().unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    // Independent per-vertex oracle, straight off the term list.
    fn oracle_values(ineq: &BellInequality, a: &Assignment) -> (Rational, Rational) {
        let mut signed = Rational::from_integer(0);
        let mut wrapped = Rational::from_integer(0);
        for t in ineq.terms() {
            let e = evaluate_term(t.pattern(), a).unwrap();
            signed += t.weight() * Rational::from_integer(e);
            wrapped += t.weight() * Rational::from_integer(e.abs());
        }
        (signed, wrapped)
    }

    #[test]
    fn chsh_signed_extremes_are_two() {
        let chsh = catalog_entry("chsh").unwrap();
        let r = certify_bound(&chsh, false).unwrap();
        assert_eq!(r.max_abs, q(2, 1));
        assert_eq!(r.signed_min, q(-2, 1));
        assert_eq!(r.signed_max, q(2, 1));
        assert_eq!(r.assignments, 16);
        let (signed, _) = oracle_values(&chsh, &r.witness_max);
        assert_eq!(signed, q(2, 1));
        let (signed, _) = oracle_values(&chsh, &r.witness_min);
        assert_eq!(signed, q(-2, 1));
    }

    #[test]
    fn complete_sets_are_mirrors() {
        let c3 = catalog_entry("cycle3").unwrap();
        let m = mirror_check(&c3).unwrap();
        assert!(m.is_mirror);
        assert_eq!((m.plus_count, m.minus_count), (32, 32));

        let c5 = catalog_entry("cycle5-a").unwrap();
        let m = mirror_check(&c5).unwrap();
        assert!(m.is_mirror);
        assert_eq!((m.plus_count, m.minus_count), (512, 512));
    }

    #[test]
    fn dropped_extremes_break_the_mirror() {
        let core = catalog_entry("cycle3-core").unwrap();
        let m = mirror_check(&core).unwrap();
        assert!(!m.is_mirror);
        // The all-agreeing assignment zeroes every MINUS bracket.
        let (signed, _) = oracle_values(&core, &Assignment::new(3, 0));
        assert_eq!(signed, q(0, 1));
    }

    #[test]
    fn wrapped_bounds_are_exactly_one() {
        for label in ["cycle3", "cycle3-core", "cycle5-a", "cycle5-b"] {
            let ineq = catalog_entry(label).unwrap();
            let r = certify_bound(&ineq, true).unwrap();
            assert_eq!(r.max_abs, q(1, 1), "{label}");
        }
        let dropped = drop_extremes(&catalog_entry("cycle5-b").unwrap()).unwrap();
        let r = certify_bound(&dropped, true).unwrap();
        assert_eq!(r.max_abs, q(1, 1));
    }

    #[test]
    fn report_matches_oracle_on_every_vertex() {
        let seed = wwwzb_seed(3).unwrap();
        let red = pair_reduce(&seed, &[pat("+-+"), pat("+--")], &[2]).unwrap();
        for ineq in [seed, red] {
            let r = certify_bound(&ineq, true).unwrap();
            let mut best = Rational::from_integer(0);
            for a in Assignment::all(3) {
                let (_, wrapped) = oracle_values(&ineq, &a);
                if wrapped > best {
                    best = wrapped;
                }
            }
            assert_eq!(r.max_abs, best);
        }
    }

    #[test]
    fn reduction_preserves_certified_bounds() {
        let seed = wwwzb_seed(4).unwrap();
        // Disagreement outside the zeroed slot: not a sibling block.
        assert!(pair_reduce(&seed, &[pat("++-+"), pat("+---")], &[3]).is_err());

        let red2 = pair_reduce(&seed, &[pat("++-+"), pat("++--")], &[3]).unwrap();
        let red4 = pair_reduce(
            &red2,
            &[pat("++++"), pat("+++-"), pat("+-++"), pat("+-+-")],
            &[1, 3],
        )
        .unwrap();
        let a = certify_bound(&seed, true).unwrap();
        for ineq in [red2, red4] {
            let b = certify_bound(&ineq, true).unwrap();
            assert_eq!(a.max_abs, b.max_abs);
            assert_eq!(a.signed_min, b.signed_min);
            assert_eq!(a.signed_max, b.signed_max);
        }
    }

    #[test]
    fn witnesses_take_the_lowest_code() {
        let c3 = catalog_entry("cycle3").unwrap();
        let r = certify_bound(&c3, true).unwrap();
        // Wrapped value is 1 on every vertex of a complete set.
        assert_eq!(r.witness_abs.code(), 0);
    }

    #[test]
    fn rejects_oversized_party_count() {
        let big = BellInequality::new(
            15,
            vec![BellTerm::new(pat("+++++++++++++++"), q(1, 2)).unwrap()],
            q(1, 1),
            "",
        );
        // Pattern construction itself allows 15 parties only if under the
        // certifier ceiling; the inequality constructor rejects first.
        assert!(big.is_err());
    }

    #[test]
    fn vertex_tensor_is_factorizable() {
        // All observables +1: the tensor is all ones.
        let t = vertex_tensor(&Assignment::new(3, 0));
        assert!(t.entries.iter().all(|&e| e == 1));
        assert_eq!(t.entry(&[3, 3, 3]).unwrap(), 1);

        // Single party, A_1 = +1, A_2 = -1: the vector (1, -1, 1).
        let t = vertex_tensor(&Assignment::new(1, 0b10));
        assert_eq!(
            (
                t.entry(&[1]).unwrap(),
                t.entry(&[2]).unwrap(),
                t.entry(&[3]).unwrap()
            ),
            (1, -1, 1)
        );
    }

    #[test]
    fn contraction_reproduces_term_evaluation() {
        // Exhaustive: all N=3 assignments against all 26 nonzero patterns.
        let symbols = [Symbol::Plus, Symbol::Minus, Symbol::Zero];
        for a in Assignment::all(3) {
            let t = vertex_tensor(&a);
            for i in 0..27 {
                let syms = vec![symbols[i / 9], symbols[i / 3 % 3], symbols[i % 3]];
                let Ok(p) = SignPattern::new(syms) else {
                    continue;
                };
                assert_eq!(
                    t.contract(&p).unwrap(),
                    evaluate_term(&p, &a).unwrap(),
                    "pattern {p} assignment {}",
                    a.code()
                );
            }
        }
    }
}
