//! Inequality construction: the full two-setting seed, deterministic pairing
//! reduction, stochastic cyclic-orbit generation, extreme-term removal, and
//! the built-in catalog of printed inequalities.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::term::{BellInequality, BellTerm, SignPattern, Symbol};
use crate::{Error, Rational, MAX_BUILD_N};

/// Full seed identity for `n` parties: all 2^n zero-free sign patterns, each
/// with weight 1/2^n, bound 1. Every deterministic assignment activates
/// exactly one term with absolute contribution 1.
pub fn wwwzb_seed(n: usize) -> Result<BellInequality, Error> {
    if !(2..=MAX_BUILD_N).contains(&n) {
        return Err(Error::BadPartyCount {
            n,
            min: 2,
            max: MAX_BUILD_N,
        });
    }
    let weight = Rational::new(1, 1i64 << n);
    let terms = (0..1u32 << n)
        .map(|mask| BellTerm::new(SignPattern::from_minus_mask(n, mask), weight))
        .collect::<Result<Vec<_>, _>>()?;
    BellInequality::new(n, terms, Rational::new(1, 1), format!("seed-{n}"))
}

/// Merges a complete sibling block into a single lower-order term.
///
/// `block` must contain exactly the 2^k patterns that agree everywhere
/// outside `positions` (0-based party indices) and run through every sign
/// combination at `positions`; all must carry equal weight. The block is
/// replaced by one term with ZERO at `positions` and the weight scaled by
/// 2^k. Mass and coverage are unchanged.
pub fn pair_reduce(
    ineq: &BellInequality,
    block: &[SignPattern],
    positions: &[usize],
) -> Result<BellInequality, Error> {
    let n = ineq.n();
    let k = positions.len();
    let mut pos_sorted = positions.to_vec();
    pos_sorted.sort_unstable();
    pos_sorted.dedup();
    if pos_sorted.len() != k || k == 0 || *pos_sorted.last().unwrap() >= n {
        return Err(Error::BlockIncomplete);
    }
    if block.len() != 1 << k {
        return Err(Error::BlockIncomplete);
    }

    // Locate each block pattern among the terms and check equal weights.
    let mut weight: Option<Rational> = None;
    for pat in block {
        let term = ineq
            .terms()
            .iter()
            .find(|t| t.pattern() == pat)
            .ok_or(Error::BlockIncomplete)?;
        match weight {
            None => weight = Some(term.weight()),
            Some(w) if w != term.weight() => return Err(Error::WeightMismatch),
            _ => {}
        }
    }
    let weight = weight.unwrap();

    // All must agree outside `positions`, carry signs (not ZERO) at
    // `positions`, and jointly exhaust the 2^k sign combinations there.
    let zeroed = |p: &SignPattern| -> Result<SignPattern, Error> {
        let mut syms = p.symbols().to_vec();
        for &j in &pos_sorted {
            if syms[j] == Symbol::Zero {
                return Err(Error::BlockIncomplete);
            }
            syms[j] = Symbol::Zero;
        }
        SignPattern::new(syms)
    };
    let base = zeroed(&block[0])?;
    let mut combos = vec![false; 1 << k];
    for pat in block {
        if zeroed(pat)? != base {
            return Err(Error::BlockIncomplete);
        }
        let mut idx = 0usize;
        for (bit, &j) in pos_sorted.iter().enumerate() {
            if pat.symbol(j) == Symbol::Minus {
                idx |= 1 << bit;
            }
        }
        combos[idx] = true;
    }
    if combos.iter().any(|c| !c) {
        return Err(Error::BlockIncomplete);
    }

    let mut terms: Vec<BellTerm> = ineq
        .terms()
        .iter()
        .filter(|t| !block.contains(t.pattern()))
        .cloned()
        .collect();
    terms.push(BellTerm::new(
        base,
        weight * Rational::new(1i64 << k, 1),
    )?);
    BellInequality::new(n, terms, ineq.bound(), ineq.label().to_string())
}

/// Removes the all-PLUS and all-MINUS zero-free terms, keeping the bound.
pub fn drop_extremes(ineq: &BellInequality) -> Result<BellInequality, Error> {
    let n = ineq.n();
    let all_plus = SignPattern::from_minus_mask(n, 0);
    let all_minus = SignPattern::from_minus_mask(n, (1u32 << n) - 1);
    let has = |p: &SignPattern| ineq.terms().iter().any(|t| t.pattern() == p);
    if !has(&all_plus) || !has(&all_minus) {
        return Err(Error::ExtremesAbsent);
    }
    let terms: Vec<BellTerm> = ineq
        .terms()
        .iter()
        .filter(|t| *t.pattern() != all_plus && *t.pattern() != all_minus)
        .cloned()
        .collect();
    BellInequality::new(
        n,
        terms,
        ineq.bound(),
        format!("{}-noext", ineq.label()),
    )
}

/// Configuration for the stochastic cyclic-orbit set generator.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub n: usize,
    /// Zeros per drawn candidate pattern.
    pub k: usize,
    pub rng_seed: u64,
    /// Candidate draw budget before giving up.
    pub max_draws: u64,
}

impl GeneratorConfig {
    pub fn new(n: usize, k: usize, rng_seed: u64) -> Self {
        GeneratorConfig {
            n,
            k,
            rng_seed,
            max_draws: 1_000_000,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if !(2..=MAX_BUILD_N).contains(&self.n) {
            return Err(Error::BadPartyCount {
                n: self.n,
                min: 2,
                max: MAX_BUILD_N,
            });
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::Parse(format!(
                "zeros per candidate must satisfy 1 <= k < n, got k={} n={}",
                self.k, self.n
            )));
        }
        if self.max_draws == 0 {
            return Err(Error::Parse("max_draws must be positive".into()));
        }
        Ok(())
    }
}

// After this many consecutive rejected draws the generator scans all
// candidates exhaustively; if none fits, the residue is completed with
// zero-free orbits instead of burning the rest of the budget.
const STALL_SCAN_THRESHOLD: u64 = 512;

/// Randomized construction of a permutation-invariant complete inequality.
///
/// Starts from the two extreme terms, repeatedly draws a pattern with
/// exactly `k` zeros and accepts its whole cyclic orbit iff the orbit's
/// covered strings neither collide internally nor with anything accepted
/// so far. When no candidate orbit can fit any more, the still-uncovered
/// strings are completed by zero-free orbits, so successful output always
/// has mass 2^n. Identical configs produce identical output.
pub fn generate_cp_set(cfg: &GeneratorConfig) -> Result<BellInequality, Error> {
    cfg.validate()?;
    let n = cfg.n;
    let total = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut covered = vec![false; total];
    let mut terms: Vec<BellTerm> = Vec::new();
    let base_weight = Rational::new(1, 1i64 << n);

    let add_pattern = |pat: SignPattern,
                           weight: Rational,
                           covered: &mut Vec<bool>,
                           terms: &mut Vec<BellTerm>|
     -> Result<(), Error> {
        for mask in pat.covered_masks() {
            covered[mask as usize] = true;
        }
        terms.push(BellTerm::new(pat, weight)?);
        Ok(())
    };

    // Seed: the two extremes.
    add_pattern(
        SignPattern::from_minus_mask(n, 0),
        base_weight,
        &mut covered,
        &mut terms,
    )?;
    add_pattern(
        SignPattern::from_minus_mask(n, (1u32 << n) - 1),
        base_weight,
        &mut covered,
        &mut terms,
    )?;
    let mut covered_count = 2usize;

    let orbit_fits = |pat: &SignPattern, covered: &[bool]| -> Option<Vec<SignPattern>> {
        let orbit = pat.cyclic_orbit();
        let mut seen: Vec<u32> = Vec::new();
        for member in &orbit {
            for mask in member.covered_masks() {
                if covered[mask as usize] || seen.contains(&mask) {
                    return None;
                }
                seen.push(mask);
            }
        }
        Some(orbit)
    };

    let orbit_weight = base_weight * Rational::new(1i64 << cfg.k, 1);
    let mut draws = 0u64;
    let mut stall = 0u64;
    let mut positions: Vec<usize> = (0..n).collect();
    while covered_count < total {
        if draws >= cfg.max_draws {
            return Err(Error::BudgetExhausted {
                draws,
                mass: covered_count as u64,
                target: total as u64,
            });
        }
        draws += 1;

        // Draw k zero positions and signs for the rest.
        positions.shuffle(&mut rng);
        let sign_bits: u32 = rng.gen_range(0..1u32 << (n - cfg.k));
        let mut syms = vec![Symbol::Plus; n];
        for &p in &positions[..cfg.k] {
            syms[p] = Symbol::Zero;
        }
        let mut bit = 0;
        for s in syms.iter_mut() {
            if *s == Symbol::Zero {
                continue;
            }
            if sign_bits >> bit & 1 == 1 {
                *s = Symbol::Minus;
            }
            bit += 1;
        }
        let pat = SignPattern::new(syms)?;

        if let Some(orbit) = orbit_fits(&pat, &covered) {
            for member in orbit {
                covered_count += member.covered_masks().count();
                add_pattern(member, orbit_weight, &mut covered, &mut terms)?;
            }
            stall = 0;
            continue;
        }
        stall += 1;

        if stall >= STALL_SCAN_THRESHOLD {
            // Exhaustive feasibility scan over every k-zero candidate.
            if !any_candidate_fits(n, cfg.k, &covered, &orbit_fits) {
                // No k-zero orbit can ever fit; complete with zero-free
                // orbits over the uncovered residue (rotation-closed).
                for mask in 0..total as u32 {
                    if !covered[mask as usize] {
                        add_pattern(
                            SignPattern::from_minus_mask(n, mask),
                            base_weight,
                            &mut covered,
                            &mut terms,
                        )?;
                    }
                }
                break;
            }
            stall = 0;
        }
    }

    BellInequality::new(
        n,
        terms,
        Rational::new(1, 1),
        format!("cp-set-n{}-k{}-seed{}", n, cfg.k, cfg.rng_seed),
    )
}

/// Published reference inequalities, transcribed exactly as printed.
///
/// The seven- and nine-party entries reproduce printing defects (missing
/// coverage, rows repeated verbatim); `BellInequality::audit` surfaces them
/// and `cmd_lint` reports them. Labels are stable API.
pub fn catalog() -> Vec<BellInequality> {
    vec![
        chsh(),
        cycle3(),
        cycle3_core(),
        cycle5_a(),
        cycle5_b(),
        cycle7(),
        cycle9_a(),
        cycle9_b(),
    ]
}

/// Catalog lookup by label.
pub fn catalog_entry(label: &str) -> Option<BellInequality> {
    catalog().into_iter().find(|i| i.label() == label)
}

/// One term per row, weight `2^zeros / 2^n`.
fn row_terms(n: usize, rows: &[&str]) -> Vec<BellTerm> {
    rows.iter()
        .map(|s| {
            let p: SignPattern = s.parse().expect("catalog pattern");
            let w = Rational::new(1i64 << p.zeros(), 1i64 << n);
            BellTerm::new(p, w).expect("catalog weight")
        })
        .collect()
}

/// Whole cyclic orbit of `seed`, each member at weight `2^zeros / 2^n`.
fn orbit_terms(n: usize, seed: &str) -> Vec<BellTerm> {
    let p: SignPattern = seed.parse().expect("catalog pattern");
    let w = Rational::new(1i64 << p.zeros(), 1i64 << n);
    p.cyclic_orbit()
        .into_iter()
        .map(|m| BellTerm::new(m, w).expect("catalog weight"))
        .collect()
}

// Complete two-party set scaled so the bound is the familiar 2: every
// assignment makes exactly one bracket product equal +-4, so the wrapped
// value is 2 on all 16 vertices.
fn chsh() -> BellInequality {
    let w = Rational::new(1, 2);
    let terms = ["++", "+-", "-+", "--"]
        .iter()
        .map(|s| BellTerm::new(s.parse().expect("pattern"), w).expect("term"))
        .collect();
    BellInequality::new(2, terms, Rational::from_integer(2), "chsh").expect("catalog entry")
}

fn cycle3() -> BellInequality {
    let mut terms = row_terms(3, &["+++", "---"]);
    terms.extend(orbit_terms(3, "+-0"));
    BellInequality::new(3, terms, Rational::from_integer(1), "cycle3").expect("catalog entry")
}

fn cycle3_core() -> BellInequality {
    let terms = orbit_terms(3, "+-0");
    BellInequality::new(3, terms, Rational::from_integer(1), "cycle3-core").expect("catalog entry")
}

fn cycle5_a() -> BellInequality {
    let mut terms = row_terms(5, &["+++++", "-----"]);
    for seed in ["+++-0", "+-+-0", "---+0"] {
        terms.extend(orbit_terms(5, seed));
    }
    BellInequality::new(5, terms, Rational::from_integer(1), "cycle5-a").expect("catalog entry")
}

fn cycle5_b() -> BellInequality {
    let mut terms = row_terms(5, &["+++++", "-----"]);
    for seed in ["+++-0", "-++-0", "-+--0"] {
        terms.extend(orbit_terms(5, seed));
    }
    BellInequality::new(5, terms, Rational::from_integer(1), "cycle5-b").expect("catalog entry")
}

fn cycle7() -> BellInequality {
    let mut terms = row_terms(7, &["+++++++", "-------"]);
    for seed in [
        "+++++-0", "++-++-0", "+-+-++0", "-+--+-0", "--+-++0", "+++---0", "+-+---0", "-----+0",
    ] {
        terms.extend(orbit_terms(7, seed));
    }
    BellInequality::from_printed(7, terms, Rational::from_integer(1), "cycle7")
        .expect("catalog entry")
}

fn cycle9_a() -> BellInequality {
    let mut terms = row_terms(9, &["+++++++++", "---------"]);
    for seed in [
        "+++++++-0", "-++++++-0", "-+++++-+0", "-++++-++0", "-+++++--0", "-++++-+-0",
        "-++++--+0", "-++++---0", "-+++-++-0", "-+++-+-+0", "-+++--+-0", "-+++-+--0",
        "-+++--++0", "-+++----0", "-+++---+0", "-++-++--0", "-++-+-+-0", "-++-+---0",
        "-++--++-0", "-++-----0", "-++---+-0", "-++-+--+0", "--++--+-0", "-+-+--+-0",
        "-+-+----0", "--+--+-+0", "----+--+0", "---+----0",
    ] {
        terms.extend(orbit_terms(9, seed));
    }
    terms.extend(row_terms(
        9,
        &[
            "++-++-++-",
            "+-++-++-+",
            "-++-++-++",
            "--+--+--+",
            "++-++-++-",
            "++-++-++-",
        ],
    ));
    BellInequality::from_printed(9, terms, Rational::from_integer(1), "cycle9-a")
        .expect("catalog entry")
}

fn cycle9_b() -> BellInequality {
    let mut terms = row_terms(9, &["+++++++++"]);
    for seed in [
        "+++++-000", "-++++-000", "-+++--000", "-++---000", "-++0-+-00", "-++-+-000",
        "--+-0-0-0",
    ] {
        terms.extend(orbit_terms(9, seed));
    }
    terms.extend(row_terms(
        9,
        &[
            "++-++-++-",
            "+-++-++-+",
            "-++-++-++",
            "--+--+--+",
            "++-++-++-",
            "++-++-++-",
            "+++++++++",
        ],
    ));
    BellInequality::from_printed(9, terms, Rational::from_integer(1), "cycle9-b")
        .expect("catalog entry")
}

fn any_candidate_fits(
    n: usize,
    k: usize,
    covered: &[bool],
    orbit_fits: &dyn Fn(&SignPattern, &[bool]) -> Option<Vec<SignPattern>>,
) -> bool {
    // Iterate all zero-position subsets of size k and all sign choices.
    let mut zero_sets: Vec<Vec<usize>> = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        zero_sets.push(idx.clone());
        // Next k-combination of {0..n}.
        let mut i = k;
        loop {
            if i == 0 {
                return zero_sets.iter().any(|zs| {
                    (0..1u32 << (n - k)).any(|sign_bits| {
                        let mut syms = vec![Symbol::Plus; n];
                        for &p in zs {
                            syms[p] = Symbol::Zero;
                        }
                        let mut bit = 0;
                        for s in syms.iter_mut() {
                            if *s == Symbol::Zero {
                                continue;
                            }
                            if sign_bits >> bit & 1 == 1 {
                                *s = Symbol::Minus;
                            }
                            bit += 1;
                        }
                        let pat = SignPattern::new(syms).expect("valid candidate");
                        orbit_fits(&pat, covered).is_some()
                    })
                });
            }
            i -= 1;
            if idx[i] != i + n - k {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(s: &str) -> SignPattern {
        s.parse().unwrap()
    }

    #[test]
    fn seed_sizes_and_weights() {
        let s2 = wwwzb_seed(2).unwrap();
        assert_eq!(s2.terms().len(), 4);
        assert!(s2
            .terms()
            .iter()
            .all(|t| t.weight() == Rational::new(1, 4)));
        let s3 = wwwzb_seed(3).unwrap();
        assert_eq!(s3.terms().len(), 8);
        assert_eq!(s3.mass().unwrap(), 8);
        assert!(wwwzb_seed(1).is_err());
        assert!(wwwzb_seed(13).is_err());
    }

    #[test]
    fn reduce_pair_on_third_party() {
        let s3 = wwwzb_seed(3).unwrap();
        let red = pair_reduce(&s3, &[pat("+-+"), pat("+--")], &[2]).unwrap();
        assert_eq!(red.terms().len(), 7);
        let t = red
            .terms()
            .iter()
            .find(|t| *t.pattern() == pat("+-0"))
            .unwrap();
        assert_eq!(t.weight(), Rational::new(2, 8));
        assert_eq!(red.mass().unwrap(), 8);
    }

    #[test]
    fn reduce_rejects_incomplete_or_mismatched() {
        let s3 = wwwzb_seed(3).unwrap();
        assert!(matches!(
            pair_reduce(&s3, &[pat("+-+")], &[2]),
            Err(Error::BlockIncomplete)
        ));
        assert!(matches!(
            pair_reduce(&s3, &[pat("+-+"), pat("+++")], &[2]),
            Err(Error::BlockIncomplete)
        ));
        // Same pattern twice is not a complete block either.
        assert!(matches!(
            pair_reduce(&s3, &[pat("+-+"), pat("+-+")], &[2]),
            Err(Error::BlockIncomplete)
        ));
    }

    #[test]
    fn reduce_block_of_four() {
        let s3 = wwwzb_seed(3).unwrap();
        let red = pair_reduce(
            &s3,
            &[pat("-++"), pat("-+-"), pat("--+"), pat("---")],
            &[1, 2],
        )
        .unwrap();
        let t = red
            .terms()
            .iter()
            .find(|t| *t.pattern() == pat("-00"))
            .unwrap();
        assert_eq!(t.weight(), Rational::new(4, 8));
        assert_eq!(red.mass().unwrap(), 8);
        assert!(red.audit().overlaps.is_empty());
    }

    #[test]
    fn three_party_pairing_chain() {
        let s3 = wwwzb_seed(3).unwrap();
        let r1 = pair_reduce(&s3, &[pat("+-+"), pat("+--")], &[2]).unwrap();
        let r2 = pair_reduce(&r1, &[pat("++-"), pat("-+-")], &[0]).unwrap();
        let r3 = pair_reduce(&r2, &[pat("-++"), pat("--+")], &[1]).unwrap();
        let mut pats: Vec<String> =
            r3.terms().iter().map(|t| t.pattern().to_string()).collect();
        pats.sort();
        assert_eq!(pats, vec!["+++", "+-0", "---", "-0+", "0+-"]);
        assert_eq!(r3.mass().unwrap(), 8);
    }

    #[test]
    fn drop_extremes_requires_both() {
        let s3 = wwwzb_seed(3).unwrap();
        let dropped = drop_extremes(&s3).unwrap();
        assert_eq!(dropped.terms().len(), 6);
        assert_eq!(dropped.mass().unwrap(), 6);
        assert!(matches!(
            drop_extremes(&dropped),
            Err(Error::ExtremesAbsent)
        ));
    }

    #[test]
    fn generator_completes_n3_k1() {
        for seed in 0..20 {
            let ineq = generate_cp_set(&GeneratorConfig::new(3, 1, seed)).unwrap();
            assert_eq!(ineq.mass().unwrap(), 8, "seed {seed}");
            let audit = ineq.audit();
            assert!(audit.overlaps.is_empty());
            assert!(audit.missing.is_empty());
        }
    }

    #[test]
    fn generator_n5_k1_structure() {
        // Every seed completes to mass 32. Some accepted pair of orbits
        // blocks all remaining single-zero orbits and forces a zero-free
        // residue; the pure 2-extremes + 3-orbit form must also occur.
        let mut pure = 0;
        for seed in 0..20 {
            let ineq = generate_cp_set(&GeneratorConfig::new(5, 1, seed)).unwrap();
            assert_eq!(ineq.mass().unwrap(), 32, "seed {seed}");
            let ones = ineq
                .terms()
                .iter()
                .filter(|t| t.pattern().zeros() == 1)
                .count();
            if ones == 15 {
                assert_eq!(ineq.terms().len(), 17);
                pure += 1;
            }
        }
        assert!(pure > 0);
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_cp_set(&GeneratorConfig::new(7, 1, 9)).unwrap();
        let b = generate_cp_set(&GeneratorConfig::new(7, 1, 9)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn generator_orbit_closure() {
        let ineq = generate_cp_set(&GeneratorConfig::new(6, 2, 5)).unwrap();
        for t in ineq.terms() {
            for rot in t.pattern().cyclic_orbit() {
                assert!(
                    ineq.terms().iter().any(|u| *u.pattern() == rot),
                    "orbit of {} not closed",
                    t.pattern()
                );
            }
        }
    }

    #[test]
    fn catalog_audits_match_printed_structure() {
        use crate::term::MassVerdict;
        let get = |l: &str| catalog_entry(l).unwrap();

        assert_eq!(get("chsh").mass().unwrap(), 4);
        assert_eq!(get("chsh").audit().verdict, MassVerdict::Complete);
        assert_eq!(get("cycle3").audit().verdict, MassVerdict::Complete);
        assert_eq!(
            get("cycle3-core").audit().verdict,
            MassVerdict::ExtremesDropped
        );
        assert_eq!(get("cycle5-a").audit().verdict, MassVerdict::Complete);
        assert_eq!(get("cycle5-b").audit().verdict, MassVerdict::Complete);

        // The printed seven-party set misses 14 strings but stays disjoint.
        let c7 = get("cycle7").audit();
        assert_eq!(c7.mass, 114);
        assert!(c7.disjoint);
        assert_eq!(c7.missing.len(), 14);
        assert_eq!(c7.verdict, MassVerdict::Defective);

        // Both printed nine-party sets repeat rows verbatim.
        let a = get("cycle9-a").audit();
        assert_eq!((a.mass, a.overlaps.len(), a.missing.len()), (512, 2, 2));
        assert_eq!(a.duplicates.len(), 1);
        let b = get("cycle9-b").audit();
        assert_eq!((b.mass, b.overlaps.len(), b.missing.len()), (512, 3, 3));
        assert_eq!(b.duplicates.len(), 2);
    }

    #[test]
    fn catalog_labels_are_unique() {
        let mut labels: Vec<String> =
            catalog().iter().map(|i| i.label().to_string()).collect();
        let before = labels.len();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), before);
    }

    #[test]
    fn generator_budget_error_reports_progress() {
        let mut cfg = GeneratorConfig::new(9, 1, 1);
        cfg.max_draws = 3;
        match generate_cp_set(&cfg) {
            Err(Error::BudgetExhausted { draws, target, .. }) => {
                assert_eq!(draws, 3);
                assert_eq!(target, 512);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }
}
