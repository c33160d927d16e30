//! Sign patterns, weighted terms, and whole Bell inequalities.
//!
//! A term is described by a pattern over `{+, -, 0}`, one symbol per party.
//! `+` stands for the bracket `(A_1 + A_2)`, `-` for `(A_1 - A_2)`, and `0`
//! for a party that drops out of the product entirely. A pattern with `z`
//! zeros stands in for the `2^z` full sign strings obtained by filling the
//! zeros with `+` or `-`; that replacement count is the term's coverage and
//! the sum of coverages over an inequality is its mass.

use crate::{Error, Rational};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

/// One party's symbol inside a sign pattern.
///
/// The ordering `Plus < Minus < Zero` is the canonical term order used when
/// inequalities are sorted and serialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Plus,
    Minus,
    Zero,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::Plus => '+',
            Symbol::Minus => '-',
            Symbol::Zero => '0',
        }
    }

    pub fn from_char(c: char) -> Result<Self, Error> {
        match c {
            '+' => Ok(Symbol::Plus),
            '-' => Ok(Symbol::Minus),
            '0' => Ok(Symbol::Zero),
            other => Err(Error::Parse(format!("invalid pattern symbol {other:?}"))),
        }
    }
}

/// A length-N sign pattern; at least two parties, never all zeros.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignPattern(Vec<Symbol>);

impl SignPattern {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, Error> {
        if symbols.len() < 2 {
            return Err(Error::BadPartyCount {
                n: symbols.len(),
                min: 2,
                max: crate::MAX_CERTIFY_N,
            });
        }
        if symbols.iter().all(|&s| s == Symbol::Zero) {
            return Err(Error::AllZeroPattern);
        }
        Ok(SignPattern(symbols))
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        let symbols = s
            .chars()
            .map(Symbol::from_char)
            .collect::<Result<Vec<_>, _>>()?;
        SignPattern::new(symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn symbol(&self, party: usize) -> Symbol {
        self.0[party]
    }

    /// Number of `0` slots.
    pub fn zeros(&self) -> usize {
        self.0.iter().filter(|&&s| s == Symbol::Zero).count()
    }

    /// True when the pattern has no `0` slots.
    pub fn is_full(&self) -> bool {
        self.zeros() == 0
    }

    pub fn uniform(n: usize, s: Symbol) -> Result<Self, Error> {
        SignPattern::new(vec![s; n])
    }

    /// Coverage of the pattern: every full sign string obtained by filling
    /// each `0` with `+` or `-`, in a fixed (lexicographic) order.
    pub fn covered_strings(&self) -> Vec<SignPattern> {
        self.covered_masks()
            .map(|m| SignPattern::from_minus_mask(self.len(), m))
            .collect()
    }

    /// Coverage as bit masks: bit `i` set means party `i` carries `-`.
    pub(crate) fn covered_masks(&self) -> impl Iterator<Item = u32> + '_ {
        let zero_bits: Vec<usize> = (0..self.len())
            .filter(|&i| self.0[i] == Symbol::Zero)
            .collect();
        let base: u32 = (0..self.len())
            .filter(|&i| self.0[i] == Symbol::Minus)
            .map(|i| 1 << i)
            .sum();
        (0u32..1 << zero_bits.len()).map(move |fill| {
            let mut m = base;
            for (k, &i) in zero_bits.iter().enumerate() {
                if fill >> k & 1 == 1 {
                    m |= 1 << i;
                }
            }
            m
        })
    }

    pub(crate) fn from_minus_mask(n: usize, mask: u32) -> SignPattern {
        SignPattern(
            (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        Symbol::Minus
                    } else {
                        Symbol::Plus
                    }
                })
                .collect(),
        )
    }

    /// Rotate party roles left by `r` places.
    pub fn rotate(&self, r: usize) -> SignPattern {
        let n = self.len();
        let r = r % n;
        let mut v = Vec::with_capacity(n);
        v.extend_from_slice(&self.0[r..]);
        v.extend_from_slice(&self.0[..r]);
        SignPattern(v)
    }

    /// All distinct cyclic rotations, sorted canonically. The orbit size is
    /// the pattern's smallest period and always divides N.
    pub fn cyclic_orbit(&self) -> Vec<SignPattern> {
        let mut orbit: Vec<SignPattern> = (0..self.len()).map(|r| self.rotate(r)).collect();
        orbit.sort();
        orbit.dedup();
        orbit
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SignPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        SignPattern::parse(s)
    }
}

/// A weighted term of a Bell expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellTerm {
    pattern: SignPattern,
    weight: Rational,
}

impl BellTerm {
    pub fn new(pattern: SignPattern, weight: Rational) -> Result<Self, Error> {
        if weight <= Rational::from_integer(0) {
            return Err(Error::NonPositiveWeight(format_rational(weight)));
        }
        Ok(BellTerm { pattern, weight })
    }

    pub fn pattern(&self) -> &SignPattern {
        &self.pattern
    }

    pub fn weight(&self) -> Rational {
        self.weight
    }
}

/// One deterministic local-hidden-variable assignment: a value in `{+1,-1}`
/// for each of the `2N` observables.
///
/// Encoded as a `2N`-bit integer: bit `i` (low block) holds `A_1` of party
/// `i`, bit `N+i` holds `A_2` of party `i`; a set bit means `-1`. The natural
/// integer order of codes is the enumeration order everywhere, which makes
/// witness reporting deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    n: usize,
    code: u32,
}

impl Assignment {
    pub fn new(n: usize, code: u32) -> Self {
        debug_assert!(n >= 1 && n <= crate::MAX_CERTIFY_N);
        debug_assert!(code < 1u32 << (2 * n) || 2 * n == 32);
        Assignment { n, code }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn code(&self) -> u32 {
        self.code
    }

    /// Value of the first observable of `party` (0-based).
    pub fn a1(&self, party: usize) -> i64 {
        if self.code >> party & 1 == 1 {
            -1
        } else {
            1
        }
    }

    /// Value of the second observable of `party` (0-based).
    pub fn a2(&self, party: usize) -> i64 {
        if self.code >> (self.n + party) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    /// Every assignment for `n` parties in natural code order.
    pub fn all(n: usize) -> impl Iterator<Item = Assignment> {
        (0..1u64 << (2 * n)).map(move |c| Assignment::new(n, c as u32))
    }
}

/// Product of brackets for one term under a deterministic assignment:
/// `+` contributes `(A_1 + A_2)`, `-` contributes `(A_1 - A_2)`, `0`
/// contributes the factor 1. The result is `0` or `±2^(N - zeros)`.
pub fn evaluate_term(pattern: &SignPattern, a: &Assignment) -> Result<i64, Error> {
    if pattern.len() != a.n() {
        return Err(Error::LengthMismatch {
            expected: a.n(),
            got: pattern.len(),
        });
    }
    let mut v: i64 = 1;
    for (party, &s) in pattern.symbols().iter().enumerate() {
        let f = match s {
            Symbol::Plus => a.a1(party) + a.a2(party),
            Symbol::Minus => a.a1(party) - a.a2(party),
            Symbol::Zero => 1,
        };
        if f == 0 {
            return Ok(0);
        }
        v *= f;
    }
    Ok(v)
}

/// Completeness classification from a mass audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MassVerdict {
    /// Disjoint coverage of all `2^N` full strings.
    Complete,
    /// Disjoint coverage of all but the two uniform strings.
    ExtremesDropped,
    /// Anything else: overlaps, duplicates, or missing strings.
    Defective,
}

/// Full coverage report for an inequality's term set.
#[derive(Debug, Clone)]
pub struct MassAudit {
    /// Sum of `2^zeros` over all terms (duplicates included).
    pub mass: u64,
    /// `2^N`.
    pub target: u64,
    pub verdict: MassVerdict,
    /// True when no full string is covered by two terms.
    pub disjoint: bool,
    /// Patterns that appear more than once, each listed once.
    pub duplicates: Vec<SignPattern>,
    /// Doubly covered full strings with the two term indices involved.
    pub overlaps: Vec<(SignPattern, usize, usize)>,
    /// Full strings no term covers.
    pub missing: Vec<SignPattern>,
}

/// A Bell inequality: weighted sign-pattern terms and a positive bound.
///
/// The wrapped reading is `sum_t w_t |<term_t>| <= bound`; the unwrapped
/// reading allows an arbitrary `±` prefix on every term. Terms are kept in
/// canonical order (lexicographic, `+ < - < 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellInequality {
    n: usize,
    terms: Vec<BellTerm>,
    bound: Rational,
    label: String,
}

impl BellInequality {
    /// Construct a valid inequality: distinct patterns, positive weights.
    pub fn new(
        n: usize,
        terms: Vec<BellTerm>,
        bound: Rational,
        label: impl Into<String>,
    ) -> Result<Self, Error> {
        let ineq = Self::from_printed(n, terms, bound, label)?;
        for w in ineq.terms.windows(2) {
            if w[0].pattern == w[1].pattern {
                return Err(Error::DuplicatePattern(w[0].pattern.to_string()));
            }
        }
        Ok(ineq)
    }

    /// Construct without the distinct-pattern check. Published inequalities
    /// are transcribed through this path so that misprints (duplicated rows)
    /// survive verbatim for the lint tooling to catch.
    pub fn from_printed(
        n: usize,
        terms: Vec<BellTerm>,
        bound: Rational,
        label: impl Into<String>,
    ) -> Result<Self, Error> {
        if !(2..=crate::MAX_CERTIFY_N).contains(&n) {
            return Err(Error::BadPartyCount {
                n,
                min: 2,
                max: crate::MAX_CERTIFY_N,
            });
        }
        if terms.is_empty() {
            return Err(Error::Parse("inequality needs at least one term".into()));
        }
        for t in &terms {
            if t.pattern.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: t.pattern.len(),
                });
            }
        }
        if bound <= Rational::from_integer(0) {
            return Err(Error::NonPositiveBound(format_rational(bound)));
        }
        let mut terms = terms;
        terms.sort_by(|a, b| a.pattern.cmp(&b.pattern));
        Ok(BellInequality {
            n,
            terms,
            bound,
            label: label.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[BellTerm] {
        &self.terms
    }

    pub fn bound(&self) -> Rational {
        self.bound
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Weight scaled by `2^N`; equals 1 on every term produced by reduction
    /// from the seed expression.
    pub fn scaled_weight(&self, term_index: usize) -> Rational {
        self.terms[term_index].weight * Rational::from_integer(1i64 << self.n)
    }

    /// Total mass, erroring out on any doubly covered string.
    pub fn mass(&self) -> Result<u64, Error> {
        let audit = self.audit();
        if let Some((s, i, j)) = audit.overlaps.first() {
            return Err(Error::Overlap {
                string: s.to_string(),
                first: *i,
                second: *j,
            });
        }
        Ok(audit.mass)
    }

    /// Full coverage audit: mass, disjointness, duplicates, missing strings.
    pub fn audit(&self) -> MassAudit {
        let target = 1u64 << self.n;
        let mut owner: Vec<Option<usize>> = vec![None; target as usize];
        let mut mass = 0u64;
        let mut overlaps = Vec::new();
        for (t, term) in self.terms.iter().enumerate() {
            for m in term.pattern.covered_masks() {
                mass += 1;
                match owner[m as usize] {
                    Some(prev) => {
                        if overlaps.len() < 64 {
                            overlaps.push((SignPattern::from_minus_mask(self.n, m), prev, t));
                        }
                    }
                    None => owner[m as usize] = Some(t),
                }
            }
        }
        let mut duplicates = Vec::new();
        let mut seen: HashMap<&SignPattern, usize> = HashMap::new();
        for term in &self.terms {
            *seen.entry(&term.pattern).or_insert(0) += 1;
        }
        for (p, count) in seen {
            if count > 1 {
                duplicates.push(p.clone());
            }
        }
        duplicates.sort();
        let missing: Vec<SignPattern> = (0..target as u32)
            .filter(|&m| owner[m as usize].is_none())
            .map(|m| SignPattern::from_minus_mask(self.n, m))
            .collect();
        let disjoint = overlaps.is_empty();
        let verdict = if disjoint && mass == target {
            MassVerdict::Complete
        } else if disjoint && mass == target - 2 && missing.iter().all(|p| p.is_full()) {
            MassVerdict::ExtremesDropped
        } else {
            MassVerdict::Defective
        };
        MassAudit {
            mass,
            target,
            verdict,
            disjoint,
            duplicates,
            overlaps,
            missing,
        }
    }
}

/// `p/q` rendering used in reports.
pub fn format_rational(r: Rational) -> String {
    if *r.denom() == 1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

// --- serialization ---

#[derive(Serialize, Deserialize)]
struct TermRepr {
    pattern: String,
    weight_num: i64,
    weight_den: i64,
}

#[derive(Serialize, Deserialize)]
struct IneqRepr {
    n: usize,
    bound_num: i64,
    bound_den: i64,
    terms: Vec<TermRepr>,
    label: String,
}

impl Serialize for BellInequality {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        IneqRepr {
            n: self.n,
            bound_num: *self.bound.numer(),
            bound_den: *self.bound.denom(),
            terms: self
                .terms
                .iter()
                .map(|t| TermRepr {
                    pattern: t.pattern.to_string(),
                    weight_num: *t.weight.numer(),
                    weight_den: *t.weight.denom(),
                })
                .collect(),
            label: self.label.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BellInequality {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = IneqRepr::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(repr.terms.len());
        for t in &repr.terms {
            if t.weight_den == 0 {
                return Err(serde::de::Error::custom("zero weight denominator"));
            }
            let pattern = SignPattern::parse(&t.pattern).map_err(serde::de::Error::custom)?;
            let term = BellTerm::new(pattern, Rational::new(t.weight_num, t.weight_den))
                .map_err(serde::de::Error::custom)?;
            terms.push(term);
        }
        if repr.bound_den == 0 {
            return Err(serde::de::Error::custom("zero bound denominator"));
        }
        BellInequality::from_printed(
            repr.n,
            terms,
            Rational::new(repr.bound_num, repr.bound_den),
            repr.label,
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(s: &str) -> SignPattern {
        SignPattern::parse(s).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["+-0", "++", "+++-0", "-0+-0"] {
            assert_eq!(pat(s).to_string(), s);
        }
    }

    #[test]
    fn rejects_bad_patterns() {
        assert!(matches!(
            SignPattern::parse("00"),
            Err(Error::AllZeroPattern)
        ));
        assert!(matches!(SignPattern::parse("+x0"), Err(Error::Parse(_))));
        assert!(matches!(
            SignPattern::parse("+"),
            Err(Error::BadPartyCount { .. })
        ));
    }

    #[test]
    fn covered_strings_expand_zeros() {
        let c = pat("+-0");
        let got: Vec<String> = c.covered_strings().iter().map(|p| p.to_string()).collect();
        assert_eq!(got, vec!["+-+", "+--"]);
        assert_eq!(pat("+-00-").covered_strings().len(), 4);
        assert_eq!(pat("+-+").covered_strings(), vec![pat("+-+")]);
    }

    #[test]
    fn evaluate_term_matches_hand_value() {
        // A_1 = +1 everywhere, A_2 = (+1, -1, *, *, -1): brackets 2*2*2.
        let n = 5;
        let code = (1 << (n + 1)) | (1 << (n + 4));
        let a = Assignment::new(n, code);
        assert_eq!(evaluate_term(&pat("+-00-"), &a).unwrap(), 8);
        // Any vanishing bracket kills the product.
        assert_eq!(evaluate_term(&pat("+++++"), &a).unwrap(), 0);
        assert!(matches!(
            evaluate_term(&pat("+-"), &a),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn evaluate_term_magnitude_is_power_of_two() {
        for a in Assignment::all(3) {
            for p in ["+-0", "0+-", "+++", "-00"] {
                let v = evaluate_term(&pat(p), &a).unwrap().unsigned_abs();
                assert!(v == 0 || v == 1 << (3 - pat(p).zeros()));
            }
        }
    }

    #[test]
    fn cyclic_orbit_sizes() {
        assert_eq!(pat("+++-0").cyclic_orbit().len(), 5);
        assert_eq!(pat("+++").cyclic_orbit().len(), 1);
        assert_eq!(pat("++-++-++-").cyclic_orbit().len(), 3);
        assert_eq!(pat("-++0-+-00").cyclic_orbit().len(), 9);
    }

    #[test]
    fn orbit_contains_all_rotations() {
        let orbit = pat("+-0").cyclic_orbit();
        assert_eq!(orbit, vec![pat("+-0"), pat("-0+"), pat("0+-")]);
    }

    #[test]
    fn canonical_term_order_is_plus_minus_zero() {
        let ineq = BellInequality::new(
            3,
            vec![
                BellTerm::new(pat("0+-"), q(1, 4)).unwrap(),
                BellTerm::new(pat("+++"), q(1, 8)).unwrap(),
                BellTerm::new(pat("---"), q(1, 8)).unwrap(),
                BellTerm::new(pat("+-0"), q(1, 4)).unwrap(),
                BellTerm::new(pat("-0+"), q(1, 4)).unwrap(),
            ],
            q(1, 1),
            "three-party",
        )
        .unwrap();
        let order: Vec<String> = ineq.terms().iter().map(|t| t.pattern().to_string()).collect();
        assert_eq!(order, vec!["+++", "+-0", "---", "-0+", "0+-"]);
    }

    #[test]
    fn mass_counts_and_verdicts() {
        let full = BellInequality::new(
            3,
            vec![
                BellTerm::new(pat("+++"), q(1, 8)).unwrap(),
                BellTerm::new(pat("+-0"), q(1, 4)).unwrap(),
                BellTerm::new(pat("0+-"), q(1, 4)).unwrap(),
                BellTerm::new(pat("-0+"), q(1, 4)).unwrap(),
                BellTerm::new(pat("---"), q(1, 8)).unwrap(),
            ],
            q(1, 1),
            "",
        )
        .unwrap();
        assert_eq!(full.mass().unwrap(), 8);
        assert_eq!(full.audit().verdict, MassVerdict::Complete);

        let dropped = BellInequality::new(
            3,
            vec![
                BellTerm::new(pat("+-0"), q(1, 4)).unwrap(),
                BellTerm::new(pat("0+-"), q(1, 4)).unwrap(),
                BellTerm::new(pat("-0+"), q(1, 4)).unwrap(),
            ],
            q(1, 1),
            "",
        )
        .unwrap();
        let audit = dropped.audit();
        assert_eq!(audit.mass, 6);
        assert_eq!(audit.verdict, MassVerdict::ExtremesDropped);
        assert_eq!(audit.missing.len(), 2);
    }

    #[test]
    fn overlap_detected() {
        let ineq = BellInequality::new(
            2,
            vec![
                BellTerm::new(pat("+0"), q(1, 4)).unwrap(),
                BellTerm::new(pat("++"), q(1, 4)).unwrap(),
            ],
            q(1, 1),
            "",
        )
        .unwrap();
        assert!(matches!(ineq.mass(), Err(Error::Overlap { .. })));
        let audit = ineq.audit();
        assert!(!audit.disjoint);
        assert_eq!(audit.verdict, MassVerdict::Defective);
    }

    #[test]
    fn duplicates_survive_printed_construction() {
        let t = || BellTerm::new(pat("++-"), q(1, 8)).unwrap();
        assert!(matches!(
            BellInequality::new(3, vec![t(), t()], q(1, 1), ""),
            Err(Error::DuplicatePattern(_))
        ));
        let printed = BellInequality::from_printed(3, vec![t(), t()], q(1, 1), "").unwrap();
        let audit = printed.audit();
        assert_eq!(audit.duplicates, vec![pat("++-")]);
        assert!(!audit.disjoint);
    }

    #[test]
    fn serialization_round_trips_exactly() {
        let ineq = BellInequality::new(
            3,
            vec![
                BellTerm::new(pat("+-0"), q(1, 4)).unwrap(),
                BellTerm::new(pat("+++"), q(3, 16)).unwrap(),
            ],
            q(2, 1),
            "example",
        )
        .unwrap();
        let json = serde_json::to_string(&ineq).unwrap();
        let back: BellInequality = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ineq);
        assert!(json.contains("\"weight_den\":16"));
    }

    #[test]
    fn deserialization_rejects_bad_shapes() {
        let bad_weight = r#"{"n":2,"bound_num":1,"bound_den":1,
            "terms":[{"pattern":"+-","weight_num":0,"weight_den":4}],"label":""}"#;
        assert!(serde_json::from_str::<BellInequality>(bad_weight).is_err());
        let bad_len = r#"{"n":3,"bound_num":1,"bound_den":1,
            "terms":[{"pattern":"+-","weight_num":1,"weight_den":4}],"label":""}"#;
        assert!(serde_json::from_str::<BellInequality>(bad_len).is_err());
    }

    #[test]
    fn assignment_encoding_is_documented_layout() {
        let a = Assignment::new(2, 0b0110);
        assert_eq!(
            (a.a1(0), a.a1(1), a.a2(0), a.a2(1)),
            (1, -1, -1, 1)
        );
        assert_eq!(Assignment::all(2).count(), 16);
    }
}
