//! Reference-value reproduction suite: eleven named checks, each measuring
//! a published number or structural claim against what this crate computes.
//! The CLI `reproduce` subcommand and the acceptance tests share this
//! registry, so a check exists exactly once.

use std::time::Instant;

use num::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::builder::{
    catalog_entry, drop_extremes, generate_cp_set, pair_reduce, wwwzb_seed, GeneratorConfig,
};
use crate::condition::{condition_indices, condition_value, trig_norm_sq};
use crate::lhv::{certify_bound, mirror_check};
use crate::optimizer::{
    fixed_state_mirror_optimize, fixed_state_optimize, scan_symmetric, see_saw, ScanConfig,
    SeeSawConfig,
};
use crate::quantum::operator::{signed_sum_apply, signed_sum_dense};
use crate::quantum::{
    bell_value, correlation_tensor, not_map, not_mixture, psi2_printed_coefficients, psi2_state,
    term_ops, PartySettings, PureState, SettingSet,
};
use crate::term::{evaluate_term, Assignment, BellInequality, SignPattern};
use crate::Rational;

/// Which checks to run: `Fast` skips the nine-party scans inside
/// `large-cycle-scan-maxima`; everything else is identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Fast,
    All,
}

/// One check's outcome.
///
/// `reference_value` is the published number the computation is held
/// against when the check pins a single scalar; multi-part checks carry
/// their numbers in `detail`. `flagged` marks comparisons known to
/// disagree with the printed sources; those report rather than gate.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub reference_value: Option<f64>,
    pub computed_value: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: bool,
    pub flagged: bool,
    pub detail: String,
    pub runtime_seconds: f64,
}

/// Registry order is stable and matches the numbered acceptance list.
pub const CHECK_NAMES: [&str; 11] = [
    "chsh-classical-bound",
    "mirror-identities",
    "reduced-bounds",
    "tsirelson-see-saw",
    "n5-symmetric-scan",
    "psi2-structure",
    "uncorrelated-mixture",
    "large-cycle-scan-maxima",
    "catalog-lint-and-regeneration",
    "oracle-equivalence",
    "condition-consistency",
];

/// Runs every check in registry order.
pub fn run_checks(scope: Scope) -> Vec<CheckReport> {
    CHECK_NAMES
        .iter()
        .map(|name| run_check(name, scope).expect("registered name"))
        .collect()
}

/// Runs one check by name; `None` for unknown names.
pub fn run_check(name: &str, scope: Scope) -> Option<CheckReport> {
    match name {
        "chsh-classical-bound" => Some(chsh_classical_bound()),
        "mirror-identities" => Some(mirror_identities()),
        "reduced-bounds" => Some(reduced_bounds()),
        "tsirelson-see-saw" => Some(tsirelson_see_saw()),
        "n5-symmetric-scan" => Some(n5_symmetric_scan()),
        "psi2-structure" => Some(psi2_structure()),
        "uncorrelated-mixture" => Some(uncorrelated_mixture()),
        "large-cycle-scan-maxima" => Some(large_cycle_scan_maxima(scope)),
        "catalog-lint-and-regeneration" => Some(catalog_lint_and_regeneration()),
        "oracle-equivalence" => Some(oracle_equivalence()),
        "condition-consistency" => Some(condition_consistency()),
        _ => None,
    }
}

fn entry(label: &str) -> BellInequality {
    catalog_entry(label).expect("catalog label")
}

fn rat_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The two-party classical bound must come out as the exact rational 2
/// over all 16 deterministic assignments.
fn chsh_classical_bound() -> CheckReport {
    let ineq = entry("chsh");
    let t0 = Instant::now();
    let rep = certify_bound(&ineq, false).expect("two parties certify");
    let dt = t0.elapsed().as_secs_f64();
    let exact = rep.max_abs == Rational::from_integer(2);
    let passed = exact && rep.assignments == 16 && dt < 1e-3;
    CheckReport {
        name: "chsh-classical-bound",
        reference_value: Some(2.0),
        computed_value: Some(rat_f64(rep.max_abs)),
        tolerance: Some(0.0),
        passed,
        flagged: false,
        detail: format!(
            "signed extremes [{}, {}] over {} assignments, exact-2 {}, {:.3} ms",
            rep.signed_min, rep.signed_max, rep.assignments, exact, dt * 1e3
        ),
        runtime_seconds: dt,
    }
}

/// Complete sets evaluate to exactly plus or minus the bound on every
/// vertex: the three-party set on all 64, the first five-party set on
/// all 1024.
fn mirror_identities() -> CheckReport {
    let t0 = Instant::now();
    let m3 = mirror_check(&entry("cycle3")).expect("n=3");
    let m5 = mirror_check(&entry("cycle5-a")).expect("n=5");
    let dt = t0.elapsed().as_secs_f64();
    let ok3 = m3.is_mirror && m3.assignments == 64 && m3.plus_count + m3.minus_count == 64;
    let ok5 = m5.is_mirror && m5.assignments == 1024 && m5.plus_count + m5.minus_count == 1024;
    CheckReport {
        name: "mirror-identities",
        reference_value: None,
        computed_value: None,
        tolerance: None,
        passed: ok3 && ok5 && dt < 1.0,
        flagged: false,
        detail: format!(
            "cycle3 mirror {} ({}+/{}-), cycle5-a mirror {} ({}+/{}-)",
            m3.is_mirror, m3.plus_count, m3.minus_count, m5.is_mirror, m5.plus_count,
            m5.minus_count
        ),
        runtime_seconds: dt,
    }
}

/// Wrapped bounds of the reduced inequalities are exactly 1, certified
/// over every assignment.
fn reduced_bounds() -> CheckReport {
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let mut all_ok = true;
    let cases = [
        ("cycle3-core", entry("cycle3-core")),
        ("cycle5-a", entry("cycle5-a")),
        ("cycle5-b", entry("cycle5-b")),
        (
            "drop-extremes(cycle5-b)",
            drop_extremes(&entry("cycle5-b")).expect("extremes present"),
        ),
    ];
    for (label, ineq) in &cases {
        let rep = certify_bound(ineq, true).expect("small n");
        let want = 1u64 << (2 * ineq.n());
        let ok = rep.max_abs == Rational::from_integer(1) && rep.assignments == want;
        all_ok &= ok;
        lines.push(format!("{label}: wrapped max {} ({})", rep.max_abs, rep.assignments));
    }
    let dt = t0.elapsed().as_secs_f64();
    CheckReport {
        name: "reduced-bounds",
        reference_value: Some(1.0),
        computed_value: None,
        tolerance: Some(0.0),
        passed: all_ok && dt < 1.0,
        flagged: false,
        detail: lines.join("; "),
        runtime_seconds: dt,
    }
}

/// See-saw on the two-party inequality must reach 2*sqrt(2).
fn tsirelson_see_saw() -> CheckReport {
    let ineq = entry("chsh");
    let cfg = SeeSawConfig::default();
    let t0 = Instant::now();
    let out = see_saw(&ineq, &cfg).expect("see-saw on chsh");
    let dt = t0.elapsed().as_secs_f64();
    let target = 8f64.sqrt();
    let err = (out.value - target).abs();
    CheckReport {
        name: "tsirelson-see-saw",
        reference_value: Some(target),
        computed_value: Some(out.value),
        tolerance: Some(1e-6),
        passed: err <= 1e-6 && cfg.restarts <= 16 && dt < 5.0,
        flagged: false,
        detail: format!(
            "value {:.9} after {} restarts, error {err:.2e}, converged {}",
            out.value, cfg.restarts, out.converged
        ),
        runtime_seconds: dt,
    }
}

/// Symmetric-angle scan of the five-party two-term-order inequality:
/// maximizer at pi/4 with value 1.97435.
fn n5_symmetric_scan() -> CheckReport {
    let ineq = entry("cycle5-b");
    let t0 = Instant::now();
    let out = scan_symmetric(&ineq, &ScanConfig::default()).expect("scan n=5");
    let dt = t0.elapsed().as_secs_f64();
    let phi_err = (out.phi - std::f64::consts::FRAC_PI_4).abs();
    let val_err = (out.value - 1.97435).abs();
    CheckReport {
        name: "n5-symmetric-scan",
        reference_value: Some(1.97435),
        computed_value: Some(out.value),
        tolerance: Some(1e-3),
        passed: phi_err <= 1e-3 && val_err <= 1e-3 && dt < 60.0,
        flagged: false,
        detail: format!(
            "phi {:.6} (pi/4 off by {phi_err:.2e}), value {:.6} (off by {val_err:.2e})",
            out.phi, out.value
        ),
        runtime_seconds: dt,
    }
}

/// The printed five-qubit coefficient table should be normalized, and the
/// state it defines should then reproduce the optimal violation under
/// see-saw-optimized settings. The second half does not hold for the
/// coefficients as printed; it is kept as stated and reported honestly.
fn psi2_structure() -> CheckReport {
    let t0 = Instant::now();
    let c = psi2_printed_coefficients();
    let mult = [1.0, 5.0, 5.0, 5.0, 5.0, 5.0, 1.0];
    let norm_sq: f64 = c.iter().zip(mult).map(|(x, m)| m * x * x).sum();
    let norm_ok = (norm_sq - 1.0).abs() <= 1e-4;

    let ineq = entry("cycle5-b");
    let saw = see_saw(&ineq, &SeeSawConfig::default()).expect("see-saw n=5");
    let psi = psi2_state();
    let val = bell_value(&ineq, &psi, &saw.settings).expect("dimensions match");
    let reaches = val >= 1.97;
    let dt = t0.elapsed().as_secs_f64();
    CheckReport {
        name: "psi2-structure",
        reference_value: Some(1.97),
        computed_value: Some(val),
        tolerance: None,
        passed: norm_ok && reaches && dt < 120.0,
        flagged: false,
        detail: format!(
            "printed norm^2 {norm_sq:.6} (ok {norm_ok}); tabulated state under see-saw \
             settings gives {val:.6} vs floor 1.97 (see-saw optimum itself {:.6})",
            saw.value
        ),
        runtime_seconds: dt,
    }
}

/// Mixing the tabulated state evenly with its Bloch flip kills every full
/// correlation and preserves the one-zero slices; the printed claim that
/// the mixture still violates strongly is evaluated as stated.
fn uncorrelated_mixture() -> CheckReport {
    let t0 = Instant::now();
    let psi = psi2_state();
    let rho = not_mixture(&psi);

    let mut max_full: f64 = 0.0;
    let mut idx = [0usize; 5];
    for code in 0..3usize.pow(5) {
        let mut c = code;
        for slot in idx.iter_mut() {
            *slot = c % 3 + 1;
            c /= 3;
        }
        let t = correlation_tensor(&rho, &idx).expect("valid tuple");
        max_full = max_full.max(t.abs());
    }

    let mut max_w4_dev: f64 = 0.0;
    for zero_pos in 0..5 {
        for code in 0..3usize.pow(4) {
            let mut c = code;
            let mut tuple = [0usize; 5];
            for (j, slot) in tuple.iter_mut().enumerate() {
                if j == zero_pos {
                    continue;
                }
                *slot = c % 3 + 1;
                c /= 3;
            }
            let tm = correlation_tensor(&rho, &tuple).expect("valid tuple");
            let tp = correlation_tensor(&psi, &tuple).expect("valid tuple");
            max_w4_dev = max_w4_dev.max((tm - tp).abs());
        }
    }

    let ineq = entry("cycle5-b");
    let mut best = f64::NEG_INFINITY;
    for r in 0..8u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x77 + r);
        let init: Vec<(f64, f64)> = (0..5)
            .map(|_| {
                (
                    rng.gen_range(0.0..std::f64::consts::PI),
                    rng.gen_range(0.0..std::f64::consts::PI),
                )
            })
            .collect();
        let (_, v) = fixed_state_optimize(&ineq, &rho, &init).expect("dimensions match");
        best = best.max(v);
    }
    let dt = t0.elapsed().as_secs_f64();

    let full_ok = max_full < 1e-10;
    let slice_ok = max_w4_dev < 1e-10;
    let reaches = best >= 1.80;
    CheckReport {
        name: "uncorrelated-mixture",
        reference_value: Some(1.80),
        computed_value: Some(best),
        tolerance: None,
        passed: full_ok && slice_ok && reaches && dt < 120.0,
        flagged: false,
        detail: format!(
            "max |full tensor entry| {max_full:.2e} (ok {full_ok}); max one-zero slice \
             deviation {max_w4_dev:.2e} (ok {slice_ok}); best of 8 fixed-state ascents \
             {best:.6} vs floor 1.80"
        ),
        runtime_seconds: dt,
    }
}

/// Symmetric scans of the seven- and nine-party catalog entries, compared
/// against the published ratios. The comparison is informational: the
/// printed values could not be reproduced by any scan we ran (see README),
/// so mismatches set `flagged` without failing the check.
fn large_cycle_scan_maxima(scope: Scope) -> CheckReport {
    let t0 = Instant::now();
    let n9_cfg = ScanConfig {
        grid_points: 21,
        refine_iters: 18,
        tolerance: 1e-4,
    };
    let items: [(&str, f64, ScanConfig); 3] = [
        ("cycle7", 1.84331, ScanConfig::default()),
        ("cycle9-a", 2.18414, n9_cfg.clone()),
        ("cycle9-b", 1.79497, n9_cfg),
    ];
    let mut lines = Vec::new();
    let mut flagged = false;
    let mut completed = true;
    for (label, printed, cfg) in items {
        if scope == Scope::Fast && label.starts_with("cycle9") {
            lines.push(format!("{label}: skipped (fast scope)"));
            continue;
        }
        let ineq = entry(label);
        let ti = Instant::now();
        match scan_symmetric(&ineq, &cfg) {
            Ok(out) => {
                let off = (out.value - printed).abs();
                let within = off <= 2e-2;
                flagged |= !within;
                lines.push(format!(
                    "{label}: computed {:.5} at phi {:.4} vs printed {printed} \
                     (|diff| {off:.3}, within 2e-2: {within}, {:.0} s)",
                    out.value,
                    out.phi,
                    ti.elapsed().as_secs_f64()
                ));
            }
            Err(e) => {
                completed = false;
                lines.push(format!("{label}: scan failed: {e}"));
            }
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    CheckReport {
        name: "large-cycle-scan-maxima",
        reference_value: None,
        computed_value: None,
        tolerance: Some(2e-2),
        passed: completed && dt < 1800.0,
        flagged,
        detail: lines.join("; "),
        runtime_seconds: dt,
    }
}

/// The printed seven-party set is short of full coverage (mass 114 of
/// 128) and both nine-party sets repeat rows; freshly generated sets
/// never show either defect.
fn catalog_lint_and_regeneration() -> CheckReport {
    let t0 = Instant::now();
    let a7 = entry("cycle7").audit();
    let mass_ok = a7.mass == 114 && a7.target == 128;
    let dup_a = !entry("cycle9-a").audit().duplicates.is_empty();
    let dup_b = !entry("cycle9-b").audit().duplicates.is_empty();

    let mut failures = 0usize;
    let mut tried = 0usize;
    for (n, k) in [(7usize, 1usize), (9, 1), (9, 3)] {
        for seed in 0..100u64 {
            tried += 1;
            let ok = match generate_cp_set(&GeneratorConfig::new(n, k, seed)) {
                Ok(ineq) => {
                    let audit = ineq.audit();
                    audit.mass == audit.target && audit.disjoint
                }
                Err(_) => false,
            };
            if !ok {
                failures += 1;
            }
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    CheckReport {
        name: "catalog-lint-and-regeneration",
        reference_value: Some(114.0),
        computed_value: Some(a7.mass as f64),
        tolerance: Some(0.0),
        passed: mass_ok && dup_a && dup_b && failures == 0 && dt < 300.0,
        flagged: false,
        detail: format!(
            "cycle7 mass {}/{}; duplicate rows cycle9-a {dup_a}, cycle9-b {dup_b}; \
             generated sets {tried} with {failures} coverage failures",
            a7.mass, a7.target
        ),
        runtime_seconds: dt,
    }
}

/// Cross-checks between independent evaluation paths on small systems:
/// merged terms against their parent blocks on every assignment, implicit
/// operator application against dense matrices, and the Bloch-flip parity
/// rule on random states.
fn oracle_equivalence() -> CheckReport {
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let mut all_ok = true;

    // (a) Merged term vs summed parents, exact, on every assignment.
    let mut merge_ok = true;
    for n in 2..=4usize {
        let seed = wwwzb_seed(n).expect("seed");
        let blocks: Vec<(Vec<SignPattern>, Vec<usize>)> = {
            let mut v = Vec::new();
            let plus = "+".repeat(n - 1);
            v.push((
                vec![
                    format!("{plus}+").parse().expect("pattern"),
                    format!("{plus}-").parse().expect("pattern"),
                ],
                vec![n - 1],
            ));
            if n == 4 {
                v.push((
                    vec![
                        "++++".parse().expect("pattern"),
                        "++-+".parse().expect("pattern"),
                        "+++-".parse().expect("pattern"),
                        "++--".parse().expect("pattern"),
                    ],
                    vec![2, 3],
                ));
            }
            v
        };
        for (block, positions) in blocks {
            let reduced = pair_reduce(&seed, &block, &positions).expect("valid block");
            let child = reduced
                .terms()
                .iter()
                .find(|t| t.pattern().zeros() == positions.len())
                .expect("merged term present");
            let w_parent = seed.terms()[0].weight();
            for a in Assignment::all(n) {
                let parents: Rational = block
                    .iter()
                    .map(|p| {
                        w_parent * Rational::from_integer(evaluate_term(p, &a).expect("eval"))
                    })
                    .sum();
                let merged = child.weight()
                    * Rational::from_integer(evaluate_term(child.pattern(), &a).expect("eval"));
                if parents.abs() != merged.abs() {
                    merge_ok = false;
                }
            }
        }
    }
    all_ok &= merge_ok;
    lines.push(format!("merged-vs-parents exact on all assignments: {merge_ok}"));

    // (b) Implicit application vs dense matrix on random vectors.
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut max_dev: f64 = 0.0;
    let cases: [(BellInequality, usize); 3] = [
        (entry("chsh"), 34),
        (entry("cycle3"), 33),
        (
            generate_cp_set(&GeneratorConfig::new(4, 1, 5)).expect("n=4 generates"),
            33,
        ),
    ];
    for (ineq, vectors) in &cases {
        let n = ineq.n();
        let dim = 1usize << n;
        let parties: Vec<PartySettings> = (0..n)
            .map(|_| {
                PartySettings::from_xz_angles(
                    rng.gen_range(0.0..std::f64::consts::PI),
                    rng.gen_range(0.0..std::f64::consts::PI),
                )
            })
            .collect();
        let settings = SettingSet::new(parties).expect("party count");
        let ops = term_ops(ineq, &settings).expect("settings match");
        for _ in 0..*vectors {
            let signs: Vec<i8> = (0..ops.len())
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect();
            let dense = signed_sum_dense(n, &ops, &signs);
            let v = PureState::random(n, &mut rng);
            let mut scratch = vec![num_complex::Complex64::new(0.0, 0.0); dim];
            let mut out = vec![num_complex::Complex64::new(0.0, 0.0); dim];
            signed_sum_apply(&ops, &signs, v.amplitudes(), &mut scratch, &mut out);
            for (row, o) in dense.iter().zip(&out) {
                let mv: num_complex::Complex64 = row
                    .iter()
                    .zip(v.amplitudes())
                    .map(|(m, x)| m * x)
                    .sum();
                max_dev = max_dev.max((mv - o).norm());
            }
        }
    }
    let dense_ok = max_dev <= 1e-10;
    all_ok &= dense_ok;
    lines.push(format!("implicit-vs-dense max deviation {max_dev:.2e}: {dense_ok}"));

    // (c) Bloch-flip parity on every index tuple of random states.
    let mut parity_dev: f64 = 0.0;
    let sizes = [2usize, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4];
    for &n in &sizes {
        let psi = PureState::random(n, &mut rng);
        let sigma = not_map(&psi);
        let mut tuple = vec![0usize; n];
        for code in 0..4usize.pow(n as u32) {
            let mut c = code;
            let mut w = 0usize;
            for slot in tuple.iter_mut() {
                *slot = c % 4;
                if *slot != 0 {
                    w += 1;
                }
                c /= 4;
            }
            let tp = correlation_tensor(&psi, &tuple).expect("tuple");
            let ts = correlation_tensor(&sigma, &tuple).expect("tuple");
            let sign = if w % 2 == 0 { 1.0 } else { -1.0 };
            parity_dev = parity_dev.max((ts - sign * tp).abs());
        }
    }
    let parity_ok = parity_dev <= 1e-10;
    all_ok &= parity_ok;
    lines.push(format!("flip-parity max deviation {parity_dev:.2e}: {parity_ok}"));

    let dt = t0.elapsed().as_secs_f64();
    CheckReport {
        name: "oracle-equivalence",
        reference_value: None,
        computed_value: None,
        tolerance: Some(1e-10),
        passed: all_ok,
        flagged: false,
        detail: lines.join("; "),
        runtime_seconds: dt,
    }
}

/// States passing the sum-of-squares screen never violate under mirror
/// settings found by repeated fixed-state ascent, and the trig coefficient
/// vector of the complete three-party set never exceeds unit norm.
fn condition_consistency() -> CheckReport {
    let t0 = Instant::now();
    let ineq = entry("cycle5-b");
    let tuples = condition_indices(&ineq).swap_axes();
    let mut gated = 0usize;
    let mut violations = 0usize;
    let mut worst: f64 = f64::NEG_INFINITY;
    for s in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x11AA + s);
        let psi = PureState::random(5, &mut rng);
        let cv = condition_value(&tuples, &psi).expect("five qubits");
        if cv <= 1.0 {
            gated += 1;
            let mut best = f64::NEG_INFINITY;
            for _ in 0..8 {
                let init: Vec<f64> = (0..5)
                    .map(|_| rng.gen_range(0.0..std::f64::consts::PI))
                    .collect();
                let (_, v) =
                    fixed_state_mirror_optimize(&ineq, &psi, &init).expect("five angles");
                best = best.max(v);
            }
            worst = worst.max(best);
            if best > 1.0 + 1e-8 {
                violations += 1;
            }
        }
    }

    let c3 = entry("cycle3");
    let mut grid_max: f64 = f64::NEG_INFINITY;
    for i in 0..11usize {
        for j in 0..11usize {
            for k in 0..11usize {
                let p = std::f64::consts::FRAC_PI_2 / 10.0;
                let v = trig_norm_sq(&c3, &[p * i as f64, p * j as f64, p * k as f64]);
                grid_max = grid_max.max(v);
            }
        }
    }
    let grid_ok = grid_max <= 1.0 + 1e-10;
    let dt = t0.elapsed().as_secs_f64();
    CheckReport {
        name: "condition-consistency",
        reference_value: Some(1.0),
        computed_value: Some(grid_max),
        tolerance: Some(1e-10),
        passed: violations == 0 && grid_ok && dt < 600.0,
        flagged: false,
        detail: format!(
            "{gated}/200 states passed the screen, {violations} violated after ascent \
             (largest ascent value {worst:.6}); trig-norm grid max {grid_max:.12}"
        ),
        runtime_seconds: dt,
    }
}
