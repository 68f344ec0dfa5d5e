//! Command-line driver: seeded spectrum dumps, Weyl-count Monte Carlo,
//! determinant-ladder verification, and log-potential tables.
//!
//! Data goes to files under `--out`; progress goes to standard error.
//! Exit codes: 0 success, 2 configuration failure, 3 runtime/solver failure.

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};
use tnlab::analysis::{
    histogram_counts, log_bin_edges, log_potential_empirical, log_potential_limit, monte_carlo,
    DomainConfig, ExperimentConfig, SymbolSpec,
};
use tnlab::grushin::{determinant_ladder, margin_grid, LadderRecord};
use tnlab::linalg::eigenvalues;
use tnlab::matrix::{build_toeplitz, perturb, sample_gaussian, trial_seed};
use tnlab::symbol::SymbolConfig;
use tnlab::Symbol64;

/// Samples used for `curve.csv` and for eigenvalue–curve distances.
const CURVE_SAMPLES: usize = 2048;
/// Bins of the logarithmic distance histogram.
const HIST_BINS: usize = 48;
/// Largest N accepted by `grushin-verify` (O(N³) per grid point).
const GRUSHIN_N_CAP: usize = 256;

#[derive(Parser)]
#[command(
    name = "tnlab",
    version,
    about = "Numerical laboratory for spectra of randomly perturbed Toeplitz matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump perturbed spectra, the symbol curve, and the distance histogram
    Spectrum(RunArgs),
    /// Monte-Carlo eigenvalue counts in a domain vs the arc-length prediction
    Weyl(RunArgs),
    /// Stream determinant-ladder residual records over an exterior z-grid
    GrushinVerify(RunArgs),
    /// Tabulate empirical vs limit log-potentials over an exterior z-grid
    Potential(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Built-in symbol preset: jordan | bidiag | exp1 | exp1_2
    #[arg(long, value_name = "NAME", conflicts_with = "symbol")]
    preset: Option<String>,

    /// JSON file holding a symbol configuration
    #[arg(long, value_name = "FILE")]
    symbol: Option<PathBuf>,

    /// Matrix sizes, comma-separated (e.g. --N 128,256,512)
    #[arg(long = "N", value_name = "LIST", value_delimiter = ',')]
    n: Vec<usize>,

    /// Circulant border width
    #[arg(long = "M", value_name = "INT")]
    m: Option<usize>,

    /// Perturbation size δ; default is the per-N rule min(1e-8, N⁻²)
    #[arg(long, value_name = "FLOAT")]
    delta: Option<f64>,

    /// Master seed; per-trial streams are derived deterministically
    #[arg(long, value_name = "INT", default_value_t = 42)]
    seed: u64,

    /// Trials per N (spectrum/weyl) or z-grid size (grushin-verify/potential)
    #[arg(long, value_name = "INT")]
    trials: Option<usize>,

    /// Counting domain as JSON, e.g. {"disc":{"cx":0,"cy":0,"r":2}}
    #[arg(long, value_name = "JSON")]
    domain: Option<String>,

    /// Output directory
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Singular-value threshold override for the second reduction
    #[arg(long, value_name = "FLOAT")]
    tau: Option<f64>,

    /// Curve margin defining the z-grids
    #[arg(long, value_name = "FLOAT", default_value_t = 0.5)]
    alpha: f64,

    /// Swap the symbol's tail sides
    #[arg(long)]
    reflect_tail: bool,
}

// ---------------------------------------------------------------------------
// failure plumbing
// ---------------------------------------------------------------------------

enum Failure {
    /// Bad flags, files, or JSON — exit code 2.
    Config(String),
    /// Solver or I/O trouble during the run — exit code 3.
    Runtime(String),
}

fn classify(e: tnlab::Error) -> Failure {
    use tnlab::Error::*;
    match e {
        Config(_) | NonSummableTail { .. } | DimensionMismatch(_)
        | SelfIntersectingBoundary { .. } | PointOnCurve { .. } => Failure::Config(e.to_string()),
        other => Failure::Runtime(other.to_string()),
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_thread_cap()?;
    match cli.command {
        Cmd::Spectrum(args) => cmd_spectrum(&args),
        Cmd::Weyl(args) => cmd_weyl(&args),
        Cmd::GrushinVerify(args) => cmd_grushin_verify(&args),
        Cmd::Potential(args) => cmd_potential(&args),
    }
}

/// TNLAB_THREADS caps the global worker pool before any parallel section.
fn init_thread_cap() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("TNLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| Failure::Config(format!("TNLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

// ---------------------------------------------------------------------------
// effective configuration and manifest
// ---------------------------------------------------------------------------

/// Every parameter a command actually ran with, defaults materialized.
/// The manifest's `config_hash` is the SHA-256 of this struct's canonical
/// JSON, so identical effective configurations hash identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct EffectiveParams {
    command: String,
    /// Preset name (string) or full symbol configuration (object).
    symbol: serde_json::Value,
    reflect_tail: bool,
    #[serde(rename = "N")]
    n: Vec<usize>,
    #[serde(rename = "M")]
    m: usize,
    /// δ per entry of `N` (the per-N default rule applied where unset).
    delta_per_n: Vec<f64>,
    seed: u64,
    trials: usize,
    domain: Option<serde_json::Value>,
    tau: Option<f64>,
    alpha: f64,
    error_threshold: f64,
    curve_samples: usize,
    z_points: usize,
}

#[derive(Serialize, Deserialize)]
struct RunManifest {
    tool_version: String,
    config_hash: String,
    master_seed: u64,
    timestamp: u64,
    parameters: EffectiveParams,
}

fn default_delta(n: usize) -> f64 {
    (1e-8f64).min((n as f64).powi(-2))
}

fn config_hash(params: &EffectiveParams) -> String {
    let canonical = serde_json::to_string(params).expect("parameters serialize");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

fn write_manifest(out: &Path, params: &EffectiveParams) -> Result<(), Failure> {
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(params),
        master_seed: params.seed,
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        parameters: params.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_text(&out.join("manifest.json"), &(text + "\n"))
}

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

/// 17 significant digits — exact round-trip for f64.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_fail(path, e))
}

fn ensure_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))
}

/// Resolves the symbol together with its canonical manifest value.
fn resolve_symbol(args: &RunArgs) -> Result<(Symbol64, serde_json::Value, SymbolSpec), Failure> {
    let (spec, value) = if let Some(name) = &args.preset {
        (
            SymbolSpec::Preset(name.clone()),
            serde_json::Value::String(name.clone()),
        )
    } else if let Some(path) = &args.symbol {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: SymbolConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let value = serde_json::to_value(&cfg).expect("symbol config serializes");
        (SymbolSpec::Config(cfg), value)
    } else {
        return Err(Failure::Config(
            "one of --preset or --symbol is required".into(),
        ));
    };
    let mut sym: Symbol64 = spec.build().map_err(classify)?;
    if args.reflect_tail {
        sym = sym.with_reflected_tail();
    }
    Ok((sym, value, spec))
}

fn n_list_or(args: &RunArgs, default: &[usize]) -> Result<Vec<usize>, Failure> {
    let list = if args.n.is_empty() {
        default.to_vec()
    } else {
        args.n.clone()
    };
    if list.iter().any(|&n| n == 0) {
        return Err(Failure::Config("N entries must be ≥ 1".into()));
    }
    Ok(list)
}

fn parse_domain(args: &RunArgs) -> Result<Option<(DomainConfig, serde_json::Value)>, Failure> {
    let Some(raw) = &args.domain else {
        return Ok(None);
    };
    let cfg: DomainConfig =
        serde_json::from_str(raw).map_err(|e| Failure::Config(format!("--domain: {e}")))?;
    let value = serde_json::to_value(&cfg).expect("domain config serializes");
    Ok(Some((cfg, value)))
}

/// The exterior z-grid every verification command draws from.
fn exterior_grid(sym: &Symbol64, alpha: f64, count: usize) -> Result<Vec<tnlab::C64>, Failure> {
    if !(alpha > 0.0) {
        return Err(Failure::Config(format!("--alpha must be positive, got {alpha}")));
    }
    let grid = margin_grid(sym, alpha, count, true);
    if grid.len() < count {
        return Err(Failure::Runtime(format!(
            "z-grid provided only {} of {count} points at margin {alpha}",
            grid.len()
        )));
    }
    Ok(grid)
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

fn cmd_spectrum(args: &RunArgs) -> Result<(), Failure> {
    let (sym, sym_value, _) = resolve_symbol(args)?;
    let n_list = n_list_or(args, &[256])?;
    let trials = args.trials.unwrap_or(1).max(1);
    let m = args.m.unwrap_or(8);

    let params = EffectiveParams {
        command: "spectrum".into(),
        symbol: sym_value,
        reflect_tail: args.reflect_tail,
        n: n_list.clone(),
        m,
        delta_per_n: n_list
            .iter()
            .map(|&n| args.delta.unwrap_or_else(|| default_delta(n)))
            .collect(),
        seed: args.seed,
        trials,
        domain: None,
        tau: args.tau,
        alpha: args.alpha,
        error_threshold: 0.1,
        curve_samples: CURVE_SAMPLES,
        z_points: 0,
    };
    ensure_out(&args.out)?;

    let curve = sym.curve_samples(CURVE_SAMPLES);
    let mut curve_csv = String::new();
    for p in curve.points() {
        let _ = writeln!(curve_csv, "{},{}", fmt(p.re), fmt(p.im));
    }
    write_text(&args.out.join("curve.csv"), &curve_csv)?;

    let mut eig_csv = String::new();
    let mut dist_csv = String::new();
    let mut distances: Vec<f64> = Vec::new();
    for (ni, &n) in n_list.iter().enumerate() {
        let delta = params.delta_per_n[ni];
        let p = build_toeplitz(&sym, n);
        for t in 0..trials {
            eprintln!("spectrum: N = {n}, trial {t}");
            let q = sample_gaussian::<f64>(n, trial_seed(args.seed, t as u64));
            let pd = perturb(&p, &q.q, delta).map_err(classify)?;
            let eigs = eigenvalues(&pd).map_err(classify)?;
            for &l in &eigs.eigenvalues {
                let _ = writeln!(eig_csv, "{},{}", fmt(l.re), fmt(l.im));
                let d = sym.refined_distance(&curve, l);
                let _ = writeln!(dist_csv, "{}", fmt(d));
                distances.push(d);
            }
        }
    }
    write_text(&args.out.join("eigenvalues.csv"), &eig_csv)?;
    write_text(&args.out.join("distances.csv"), &dist_csv)?;

    let edges = log_bin_edges(curve.diameter(), HIST_BINS);
    let counts = histogram_counts(&distances, &edges);
    let mut hist_csv = String::new();
    for (b, &c) in counts.iter().enumerate() {
        let _ = writeln!(hist_csv, "{},{},{c}", fmt(edges[b]), fmt(edges[b + 1]));
    }
    write_text(&args.out.join("histogram.csv"), &hist_csv)?;

    write_manifest(&args.out, &params)
}

// ---------------------------------------------------------------------------
// weyl
// ---------------------------------------------------------------------------

fn cmd_weyl(args: &RunArgs) -> Result<(), Failure> {
    let (_, sym_value, spec) = resolve_symbol(args)?;
    let Some((domain_cfg, domain_value)) = parse_domain(args)? else {
        return Err(Failure::Config("weyl requires --domain".into()));
    };
    let n_list = n_list_or(args, &[128, 256, 512])?;
    let trials = args.trials.unwrap_or(10).max(1);
    let m = args.m.unwrap_or(8);

    let config = ExperimentConfig {
        symbol: spec,
        n: n_list.clone(),
        m,
        delta: args.delta,
        trials,
        seed0: args.seed,
        domain: domain_cfg,
        error_threshold: None,
        reflect_tail: args.reflect_tail,
    };
    let params = EffectiveParams {
        command: "weyl".into(),
        symbol: sym_value,
        reflect_tail: args.reflect_tail,
        n: n_list.clone(),
        m,
        delta_per_n: n_list.iter().map(|&n| config.delta_for(n)).collect(),
        seed: args.seed,
        trials,
        domain: Some(domain_value),
        tau: args.tau,
        alpha: args.alpha,
        error_threshold: config.error_threshold(),
        curve_samples: CURVE_SAMPLES,
        z_points: 0,
    };
    ensure_out(&args.out)?;

    eprintln!(
        "weyl: {} sizes × {trials} trials, seed {}",
        n_list.len(),
        args.seed
    );
    let output = monte_carlo::<f64>(&config).map_err(classify)?;

    let aggregate =
        serde_json::to_string_pretty(&output.report).expect("aggregate serializes");
    write_text(&args.out.join("aggregate.json"), &(aggregate + "\n"))?;

    for (n, t, trial) in &output.trials {
        let report =
            serde_json::to_string_pretty(&trial.report).expect("trial report serializes");
        write_text(&args.out.join(format!("report_N{n}_t{t}.json")), &(report + "\n"))?;
        let mut eig_csv = String::new();
        for &l in &trial.eigenvalues {
            let _ = writeln!(eig_csv, "{},{}", fmt(l.re), fmt(l.im));
        }
        write_text(&args.out.join(format!("eigenvalues_N{n}_t{t}.csv")), &eig_csv)?;
    }
    for line in &output.report.failures {
        eprintln!("weyl: failed trial: {line}");
    }

    write_manifest(&args.out, &params)
}

// ---------------------------------------------------------------------------
// grushin-verify
// ---------------------------------------------------------------------------

fn cmd_grushin_verify(args: &RunArgs) -> Result<(), Failure> {
    let (sym, sym_value, _) = resolve_symbol(args)?;
    let n_list = n_list_or(args, &[64])?;
    if let Some(&n) = n_list.iter().find(|&&n| n > GRUSHIN_N_CAP) {
        return Err(Failure::Config(format!(
            "grushin-verify accepts N ≤ {GRUSHIN_N_CAP} (got {n}); the ladder is O(N³) per grid point"
        )));
    }
    let m = args.m.unwrap_or(4);
    let z_points = args.trials.unwrap_or(20).max(1);

    let params = EffectiveParams {
        command: "grushin-verify".into(),
        symbol: sym_value,
        reflect_tail: args.reflect_tail,
        n: n_list.clone(),
        m,
        delta_per_n: n_list
            .iter()
            .map(|&n| args.delta.unwrap_or_else(|| default_delta(n)))
            .collect(),
        seed: args.seed,
        trials: z_points,
        domain: None,
        tau: args.tau,
        alpha: args.alpha,
        error_threshold: 0.1,
        curve_samples: CURVE_SAMPLES,
        z_points,
    };
    ensure_out(&args.out)?;

    let grid = exterior_grid(&sym, args.alpha, z_points)?;
    let mut lines = String::new();
    for (ni, &n) in n_list.iter().enumerate() {
        let delta = params.delta_per_n[ni];
        for (zi, &z) in grid.iter().enumerate() {
            eprintln!("grushin-verify: N = {n}, z-point {zi}");
            let q = sample_gaussian::<f64>(n, trial_seed(args.seed, (ni * z_points + zi) as u64));
            let report =
                determinant_ladder(&sym, n, m, z, delta, &q.q, args.tau).map_err(classify)?;
            let record = LadderRecord::from(&report);
            let line = serde_json::to_string(&record).expect("record serializes");
            lines.push_str(&line);
            lines.push('\n');
        }
    }
    write_text(&args.out.join("grushin.jsonl"), &lines)?;

    write_manifest(&args.out, &params)
}

// ---------------------------------------------------------------------------
// potential
// ---------------------------------------------------------------------------

fn cmd_potential(args: &RunArgs) -> Result<(), Failure> {
    let (sym, sym_value, _) = resolve_symbol(args)?;
    let n_list = n_list_or(args, &[128, 256, 512])?;
    let m = args.m.unwrap_or(8);
    let z_points = args.trials.unwrap_or(8).max(1);

    let params = EffectiveParams {
        command: "potential".into(),
        symbol: sym_value,
        reflect_tail: args.reflect_tail,
        n: n_list.clone(),
        m,
        delta_per_n: n_list
            .iter()
            .map(|&n| args.delta.unwrap_or_else(|| default_delta(n)))
            .collect(),
        seed: args.seed,
        trials: z_points,
        domain: None,
        tau: args.tau,
        alpha: args.alpha,
        error_threshold: 0.1,
        curve_samples: CURVE_SAMPLES,
        z_points,
    };
    ensure_out(&args.out)?;

    let grid = exterior_grid(&sym, args.alpha, z_points)?;
    let limits: Vec<f64> = grid
        .iter()
        .map(|&z| log_potential_limit(&sym, z, 4096).map_err(classify))
        .collect::<Result<_, _>>()?;

    // rows: z_re, z_im, N, empirical, limit, difference
    let mut table = String::new();
    for (ni, &n) in n_list.iter().enumerate() {
        eprintln!("potential: N = {n}");
        let delta = params.delta_per_n[ni];
        let p = build_toeplitz(&sym, n);
        let q = sample_gaussian::<f64>(n, trial_seed(args.seed, ni as u64));
        let pd = perturb(&p, &q.q, delta).map_err(classify)?;
        let eigs = eigenvalues(&pd).map_err(classify)?;
        for (zi, &z) in grid.iter().enumerate() {
            let emp = log_potential_empirical(&eigs, z).map_err(classify)?;
            let lim = limits[zi];
            let _ = writeln!(
                table,
                "{},{},{n},{},{},{}",
                fmt(z.re),
                fmt(z.im),
                fmt(emp),
                fmt(lim),
                fmt(emp - lim)
            );
        }
    }
    write_text(&args.out.join("potential.csv"), &table)?;

    write_manifest(&args.out, &params)
}
