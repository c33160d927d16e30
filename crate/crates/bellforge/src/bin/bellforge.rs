//! Command-line front end: construction, certification, violation search,
//! tensor inspection, the sufficient-condition screen, catalog lint, and
//! the reference reproduction suite.
//!
//! Exit codes: 0 success, 1 failed check or computation error, 2 usage
//! error, 3 unreadable or unparseable input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bellforge::builder::{catalog, catalog_entry, drop_extremes, generate_cp_set, GeneratorConfig};
use bellforge::condition::{condition_indices, condition_value_swept};
use bellforge::lhv::{certify_bound, mirror_check};
use bellforge::optimizer::{
    fixed_state_mirror_optimize, fixed_state_optimize, scan_symmetric, see_saw, ScanConfig,
    SeeSawConfig,
};
use bellforge::quantum::{correlation_tensor, MixedState, PureState, SettingSet};
use bellforge::term::{format_rational, BellInequality, MassVerdict};
use bellforge::Error;

#[derive(Parser)]
#[command(name = "bellforge", version, about = "Bell inequalities with lower-order correlations")]
struct Cli {
    /// Worker thread cap (fallback: BELLFORGE_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a complete term set by random cyclic-orbit packing.
    Build(BuildArgs),
    /// List built-in inequalities, or export one as a file.
    Catalog(CatalogArgs),
    /// Certify the exact assignment bound by full enumeration.
    Certify(CertifyArgs),
    /// Search for quantum violation of an inequality.
    Violate(ViolateArgs),
    /// Print correlation-tensor entries of a state.
    Tensor(TensorArgs),
    /// Evaluate the sum-of-squares non-violation screen for a state.
    Condition(ConditionArgs),
    /// Audit coverage, duplicates, orbit closure, and the mirror property.
    Lint(LintArgs),
    /// Run the reference reproduction checks.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Party count.
    #[arg(long)]
    n: usize,
    /// Zeros per drawn orbit pattern.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Remove the two zero-free uniform terms after generation.
    #[arg(long)]
    drop_extremes: bool,
    /// Write the inequality here as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CatalogArgs {
    /// List every entry (default when no label is given).
    #[arg(long)]
    list: bool,
    /// Export this entry.
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Inequality: catalog label or JSON file path.
    #[arg(long)]
    ineq: String,
    /// Bound the per-term-modulus expression instead of the signed one.
    #[arg(long)]
    wrapped: bool,
    /// Also test whether the signed value is +/-bound on every vertex.
    #[arg(long)]
    mirror: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ViolateArgs {
    /// Inequality: catalog label or JSON file path.
    #[arg(long)]
    ineq: String,
    /// Restrict to one shared mirror angle (grid scan; with --state, a
    /// mirror-constrained ascent).
    #[arg(long)]
    symmetric: bool,
    /// Optimize settings for this fixed state instead of see-sawing.
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a JSON report here.
    #[arg(long, alias = "report")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TensorArgs {
    /// State file (JSON amplitudes).
    #[arg(long)]
    state: PathBuf,
    /// Index tuple, one digit 0-3 per party ("13013"), repeatable.
    #[arg(long = "index", required = true)]
    indices: Vec<String>,
    /// Evaluate on the even mixture with the Bloch-flipped state.
    #[arg(long)]
    flipped_mixture: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConditionArgs {
    /// Inequality: catalog label or JSON file path.
    #[arg(long)]
    ineq: String,
    #[arg(long)]
    state: PathBuf,
    /// Extra random local frames to sample beyond the identity frame.
    #[arg(long, default_value_t = 0)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LintArgs {
    /// Inequality: catalog label or JSON file path.
    #[arg(long)]
    ineq: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// "all" runs everything; "fast" skips the nine-party scans.
    #[arg(long, default_value = "fast")]
    scope: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }

    fn check(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli
        .threads
        .or_else(|| std::env::var("BELLFORGE_THREADS").ok()?.parse().ok())
    {
        // Ignored if a pool already exists; caps rayon workers otherwise.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bellforge: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Build(a) => cmd_build(a),
        Cmd::Catalog(a) => cmd_catalog(a),
        Cmd::Certify(a) => cmd_certify(a),
        Cmd::Violate(a) => cmd_violate(a),
        Cmd::Tensor(a) => cmd_tensor(a),
        Cmd::Condition(a) => cmd_condition(a),
        Cmd::Lint(a) => cmd_lint(a),
        Cmd::Reproduce(a) => cmd_reproduce(a),
    }
}

fn load_ineq(spec: &str) -> Result<BellInequality, Failure> {
    if let Some(ineq) = catalog_entry(spec) {
        return Ok(ineq);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Failure::parse(format!("cannot read inequality '{spec}': {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("cannot parse inequality '{spec}': {e}")))
}

fn load_state(path: &Path) -> Result<PureState, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read state '{}': {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("cannot parse state '{}': {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::check(format!("serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| Failure::check(format!("cannot write '{}': {e}", path.display())))
}

fn verdict_str(v: &MassVerdict) -> &'static str {
    match v {
        MassVerdict::Complete => "complete",
        MassVerdict::ExtremesDropped => "extremes-dropped",
        MassVerdict::Defective => "defective",
    }
}

fn party_angles(settings: &SettingSet) -> Vec<(f64, f64)> {
    settings
        .parties()
        .iter()
        .map(|p| {
            let a = p.first();
            let b = p.second();
            (a[0].atan2(a[2]), b[0].atan2(b[2]))
        })
        .collect()
}

fn cmd_build(a: BuildArgs) -> Result<(), Failure> {
    let cfg = GeneratorConfig::new(a.n, a.k, a.seed);
    let mut ineq = generate_cp_set(&cfg)?;
    if a.drop_extremes {
        ineq = drop_extremes(&ineq)?;
    }
    let audit = ineq.audit();
    println!(
        "{}: {} parties, {} terms, mass {}/{} ({}), bound {}",
        ineq.label(),
        ineq.n(),
        ineq.terms().len(),
        audit.mass,
        audit.target,
        verdict_str(&audit.verdict),
        format_rational(ineq.bound()),
    );
    if let Some(out) = a.out {
        write_json(&out, &ineq)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cmd_catalog(a: CatalogArgs) -> Result<(), Failure> {
    if let Some(label) = a.label {
        let ineq = catalog_entry(&label)
            .ok_or_else(|| Failure::parse(format!("no catalog entry '{label}'")))?;
        match a.out {
            Some(out) => {
                write_json(&out, &ineq)?;
                println!("wrote {}", out.display());
            }
            None => println!(
                "{}",
                serde_json::to_string_pretty(&ineq)
                    .map_err(|e| Failure::check(e.to_string()))?
            ),
        }
        return Ok(());
    }
    println!(
        "{:<12} {:>2} {:>6} {:>9} {:>7}  verdict",
        "label", "n", "terms", "mass", "bound"
    );
    for ineq in catalog() {
        let audit = ineq.audit();
        println!(
            "{:<12} {:>2} {:>6} {:>4}/{:<4} {:>7}  {}",
            ineq.label(),
            ineq.n(),
            ineq.terms().len(),
            audit.mass,
            audit.target,
            format_rational(ineq.bound()),
            verdict_str(&audit.verdict),
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct CertifyReport {
    label: String,
    wrapped: bool,
    max_abs: String,
    signed_min: String,
    signed_max: String,
    is_mirror: bool,
    assignments: u64,
    bound: String,
    attains_bound: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    mirror_plus: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mirror_minus: Option<u64>,
}

fn cmd_certify(a: CertifyArgs) -> Result<(), Failure> {
    let ineq = load_ineq(&a.ineq)?;
    let rep = certify_bound(&ineq, a.wrapped)?;
    let mut report = CertifyReport {
        label: ineq.label().to_string(),
        wrapped: rep.wrapped,
        max_abs: format_rational(rep.max_abs),
        signed_min: format_rational(rep.signed_min),
        signed_max: format_rational(rep.signed_max),
        is_mirror: rep.is_mirror,
        assignments: rep.assignments,
        bound: format_rational(ineq.bound()),
        attains_bound: rep.max_abs == ineq.bound(),
        mirror_plus: None,
        mirror_minus: None,
    };
    println!(
        "{}: {} max {} over {} assignments (signed range [{}, {}]), declared bound {}",
        report.label,
        if rep.wrapped { "wrapped" } else { "signed" },
        report.max_abs,
        rep.assignments,
        report.signed_min,
        report.signed_max,
        report.bound,
    );
    if a.mirror {
        let m = mirror_check(&ineq)?;
        report.mirror_plus = Some(m.plus_count);
        report.mirror_minus = Some(m.minus_count);
        println!(
            "mirror: {} ({} at +bound, {} at -bound)",
            m.is_mirror, m.plus_count, m.minus_count
        );
    }
    if let Some(out) = a.out {
        write_json(&out, &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ViolateReport {
    label: String,
    mode: &'static str,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,
    angles: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<PureState>,
}

fn cmd_violate(a: ViolateArgs) -> Result<(), Failure> {
    let ineq = load_ineq(&a.ineq)?;
    let n = ineq.n();
    let report = match (&a.state, a.symmetric) {
        (None, true) => {
            let out = scan_symmetric(&ineq, &ScanConfig::default())?;
            let settings =
                bellforge::optimizer::settings_from_angles(&vec![out.phi; n])?;
            ViolateReport {
                label: ineq.label().to_string(),
                mode: "symmetric-scan",
                value: out.value,
                phi: Some(out.phi),
                angles: party_angles(&settings),
                converged: None,
                state: Some(out.state),
            }
        }
        (None, false) => {
            let cfg = SeeSawConfig {
                restarts: a.restarts,
                rng_seed: a.seed,
                ..SeeSawConfig::default()
            };
            let out = see_saw(&ineq, &cfg)?;
            ViolateReport {
                label: ineq.label().to_string(),
                mode: "see-saw",
                value: out.value,
                phi: None,
                angles: party_angles(&out.settings),
                converged: Some(out.converged),
                state: Some(out.state),
            }
        }
        (Some(path), symmetric) => {
            let state = load_state(path)?;
            use rand::{Rng, SeedableRng};
            let mut best: Option<ViolateReport> = None;
            for r in 0..a.restarts.max(1) as u64 {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed.wrapping_add(r));
                let (angles, value) = if symmetric {
                    let init: Vec<f64> = (0..n)
                        .map(|_| rng.gen_range(0.0..std::f64::consts::PI))
                        .collect();
                    let (phis, value) = fixed_state_mirror_optimize(&ineq, &state, &init)?;
                    (phis.iter().map(|&p| (p, -p)).collect::<Vec<_>>(), value)
                } else {
                    let init: Vec<(f64, f64)> = (0..n)
                        .map(|_| {
                            (
                                rng.gen_range(0.0..std::f64::consts::PI),
                                rng.gen_range(0.0..std::f64::consts::PI),
                            )
                        })
                        .collect();
                    let (settings, value) = fixed_state_optimize(&ineq, &state, &init)?;
                    (party_angles(&settings), value)
                };
                if best.as_ref().is_none_or(|b| value > b.value) {
                    best = Some(ViolateReport {
                        label: ineq.label().to_string(),
                        mode: if symmetric {
                            "fixed-state-mirror"
                        } else {
                            "fixed-state"
                        },
                        value,
                        phi: None,
                        angles,
                        converged: None,
                        state: None,
                    });
                }
            }
            best.expect("at least one restart")
        }
    };
    println!(
        "{}: {} value {:.9}{}",
        report.label,
        report.mode,
        report.value,
        report
            .phi
            .map(|p| format!(" at shared angle {p:.6}"))
            .unwrap_or_default(),
    );
    for (j, (p1, p2)) in report.angles.iter().enumerate() {
        println!("  party {j}: angles ({p1:.6}, {p2:.6})");
    }
    if let Some(out) = a.out {
        write_json(&out, &report)?;
    }
    Ok(())
}

fn parse_index(raw: &str, n: usize) -> Result<Vec<usize>, Failure> {
    let digits: Vec<usize> = if raw.contains(',') {
        raw.split(',')
            .map(|d| d.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::parse(format!("bad index tuple '{raw}'")))?
    } else {
        raw.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Failure::parse(format!("bad index tuple '{raw}'")))
            })
            .collect::<Result<_, _>>()?
    };
    if digits.len() != n || digits.iter().any(|&d| d > 3) {
        return Err(Failure::parse(format!(
            "index tuple '{raw}' needs {n} digits in 0..=3"
        )));
    }
    Ok(digits)
}

#[derive(Serialize)]
struct TensorReport {
    entries: Vec<TensorEntry>,
}

#[derive(Serialize)]
struct TensorEntry {
    index: Vec<usize>,
    value: f64,
}

fn cmd_tensor(a: TensorArgs) -> Result<(), Failure> {
    let state = load_state(&a.state)?;
    let n = state.n();
    let mixture: Option<MixedState> = a
        .flipped_mixture
        .then(|| bellforge::quantum::not_mixture(&state));
    let mut entries = Vec::new();
    for raw in &a.indices {
        let index = parse_index(raw, n)?;
        let value = match &mixture {
            Some(m) => correlation_tensor(m, &index)?,
            None => correlation_tensor(&state, &index)?,
        };
        println!(
            "T[{}] = {value:.12}",
            index
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("")
        );
        entries.push(TensorEntry { index, value });
    }
    if let Some(out) = a.out {
        write_json(&out, &TensorReport { entries })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ConditionReport {
    label: String,
    /// Published x-primary tuple map, identity frame.
    literal_value: f64,
    /// z-primary map matching this crate's mirror settings.
    mirror_value: f64,
    /// Max of the mirror-map value over sampled frames (incl. identity).
    frame_max: f64,
    frames: usize,
    satisfied: bool,
}

fn cmd_condition(a: ConditionArgs) -> Result<(), Failure> {
    let ineq = load_ineq(&a.ineq)?;
    let state = load_state(&a.state)?;
    let literal = condition_indices(&ineq);
    let mirror = literal.swap_axes();
    let (literal_value, _) = condition_value_swept(&literal, &state, 0, a.seed)?;
    let (mirror_value, frame_max) = condition_value_swept(&mirror, &state, a.frames, a.seed)?;
    let report = ConditionReport {
        label: ineq.label().to_string(),
        literal_value,
        mirror_value,
        frame_max,
        frames: a.frames,
        satisfied: frame_max <= 1.0,
    };
    println!(
        "{}: tuple-square sum {:.9} (published map {:.9}); max over {} sampled frames {:.9}",
        report.label, report.mirror_value, report.literal_value, report.frames, report.frame_max,
    );
    println!(
        "{}",
        if report.satisfied {
            "<= 1: no mirror-XZ violation from these frames"
        } else {
            "> 1: the screen is inconclusive for this state"
        }
    );
    if let Some(out) = a.out {
        write_json(&out, &report)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LintReport {
    label: String,
    n: usize,
    terms: usize,
    mass: u64,
    target: u64,
    verdict: &'static str,
    disjoint: bool,
    duplicates: Vec<String>,
    overlaps: usize,
    missing: usize,
    orbit_closed: bool,
    is_mirror: bool,
    complete_and_disjoint: bool,
}

fn cmd_lint(a: LintArgs) -> Result<(), Failure> {
    let ineq = load_ineq(&a.ineq)?;
    let audit = ineq.audit();
    let orbit_closed = ineq.terms().iter().all(|t| {
        t.pattern().cyclic_orbit().iter().all(|rot| {
            ineq
                .terms()
                .iter()
                .any(|u| u.pattern() == rot && u.weight() == t.weight())
        })
    });
    let mirror = mirror_check(&ineq)?;
    let report = LintReport {
        label: ineq.label().to_string(),
        n: ineq.n(),
        terms: ineq.terms().len(),
        mass: audit.mass,
        target: audit.target,
        verdict: verdict_str(&audit.verdict),
        disjoint: audit.disjoint,
        duplicates: audit.duplicates.iter().map(|p| p.to_string()).collect(),
        overlaps: audit.overlaps.len(),
        missing: audit.missing.len(),
        orbit_closed,
        is_mirror: mirror.is_mirror,
        complete_and_disjoint: matches!(audit.verdict, MassVerdict::Complete) && audit.disjoint,
    };
    println!(
        "{}: mass {}/{} ({}), disjoint {}, duplicates {:?}, overlaps {}, missing {}",
        report.label,
        report.mass,
        report.target,
        report.verdict,
        report.disjoint,
        report.duplicates,
        report.overlaps,
        report.missing,
    );
    println!(
        "orbit-closed {}, mirror {}",
        report.orbit_closed, report.is_mirror
    );
    if let Some(out) = a.out {
        write_json(&out, &report)?;
    }
    if report.complete_and_disjoint {
        Ok(())
    } else {
        Err(Failure::check(format!(
            "{}: not a complete disjoint cover",
            report.label
        )))
    }
}

fn cmd_reproduce(a: ReproduceArgs) -> Result<(), Failure> {
    let scope = match a.scope.as_str() {
        "all" => bellforge::repro::Scope::All,
        "fast" => bellforge::repro::Scope::Fast,
        other => return Err(Failure::parse(format!("scope must be all|fast, got '{other}'"))),
    };
    let reports = bellforge::repro::run_checks(scope);
    println!(
        "{:<30} {:>12} {:>12} {:>9} {:>8} {:>9}",
        "check", "reference", "computed", "tol", "status", "time"
    );
    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
    for r in &reports {
        println!(
            "{:<30} {:>12} {:>12} {:>9} {:>8} {:>8.2}s",
            r.name,
            fmt_opt(r.reference_value),
            fmt_opt(r.computed_value),
            r.tolerance
                .map(|t| format!("{t:.0e}"))
                .unwrap_or_else(|| "-".into()),
            match (r.passed, r.flagged) {
                (true, false) => "pass",
                (true, true) => "flagged",
                (false, _) => "FAIL",
            },
            r.runtime_seconds,
        );
    }
    for r in &reports {
        println!("\n{}:\n  {}", r.name, r.detail);
    }
    if let Some(out) = a.out {
        write_json(&out, &reports)?;
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        println!("\nall {} checks passed", reports.len());
        Ok(())
    } else {
        Err(Failure::check(format!(
            "{} of {} checks failed: {}",
            failed.len(),
            reports.len(),
            failed.join(", ")
        )))
    }
}
