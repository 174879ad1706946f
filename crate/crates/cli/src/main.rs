//! `fbl` — finite-blocklength bound toolbox for discrete channels.
//!
//! Subcommands evaluate bound curves over rate grids or at explicit codebook
//! sizes, construct the matched output-distribution witness, evaluate and
//! Monte-Carlo-simulate explicit codes, compute closed-form product-channel
//! curves, and run the library's self-certification fleets.
//!
//! Conventions shared by every subcommand:
//! * rates are in nats (`--bits` converts *displayed* summary rates only);
//! * artifacts go to `--out` when given, otherwise to stdout, and runs are
//!   byte-deterministic given the same inputs and seed;
//! * exit 0 on success, 1 when a computation rejects its inputs (domain or
//!   invariant violation), 2 for unreadable or malformed input files and
//!   command-line usage errors;
//! * `FBL_THREADS` caps the size of the internal thread pool.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use fbl_core::bounds::{self, BoundCurve};
use fbl_core::channel::{prior_from_path, ChannelConfig};
use fbl_core::hypothesis::{beta_vs_cdf, matched_witness};
use fbl_core::product::{self, BecSpec, BscSpec};
use fbl_core::simulator::{converse_equality_check, random_coding_mc, Codebook};
use fbl_core::verify;
use fbl_core::Metric;

const LN_2: f64 = core::f64::consts::LN_2;

// ---------------------------------------------------------------------------
// Failure plumbing
// ---------------------------------------------------------------------------

/// Exit status 1 marks domain errors from a computation; exit status 2 marks
/// unusable inputs (missing/malformed files, bad flag combinations).
struct Failure {
    code: i32,
    message: String,
}

type CliResult<T> = Result<T, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// Wraps errors raised while loading inputs: exit code 2.
fn load<T>(r: fbl_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| Failure {
        code: 2,
        message: e.to_string(),
    })
}

/// Wraps errors raised while computing on valid inputs: exit code 1.
fn compute<T>(r: fbl_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Command-line grammar
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "fbl",
    version,
    about = "Exact finite-blocklength error bounds for discrete channels",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate F, clipped and exact random-coding bounds for a channel file
    Bounds(BoundsArgs),
    /// Construct the output law that makes the converse tight at one rate
    Witness(WitnessArgs),
    /// Monte-Carlo estimate of the exact random-coding error
    Mc(McArgs),
    /// Exact decoder error of an explicit code, with the converse identity
    CodeEval(CodeEvalArgs),
    /// Closed-form curves for repeated binary channels
    Product(ProductArgs),
    /// Run the numerical self-certification fleets
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Rate-grid mode (`--rate-min/--rate-max/--rate-points`) or explicit-size
/// mode (`--M`); exactly one per invocation.
#[derive(Args)]
struct GridArgs {
    /// Lowest rate of the sweep, in nats
    #[arg(long, value_name = "NATS", conflicts_with = "size")]
    rate_min: Option<f64>,
    /// Highest rate of the sweep, in nats (must exceed --rate-min)
    #[arg(long, value_name = "NATS", conflicts_with = "size")]
    rate_max: Option<f64>,
    /// Number of evenly spaced grid points
    #[arg(long, value_name = "N", default_value_t = 50,
          value_parser = clap::value_parser!(u64).range(1..))]
    rate_points: u64,
    /// Explicit codebook size: single-point mode with clipping factor M-1
    #[arg(long = "M", value_name = "M", conflicts_with_all = ["rate_min", "rate_max"],
          value_parser = clap::value_parser!(u64).range(1..))]
    size: Option<u64>,
}

enum GridMode {
    Rates(Vec<f64>),
    Size(u64),
}

impl GridArgs {
    fn mode(&self) -> CliResult<GridMode> {
        if let Some(m) = self.size {
            return Ok(GridMode::Size(m));
        }
        match (self.rate_min, self.rate_max) {
            (Some(lo), Some(hi)) => {
                if !(lo < hi) {
                    return Err(usage(format!(
                        "--rate-min ({lo}) must be strictly below --rate-max ({hi})"
                    )));
                }
                load(bounds::rate_grid(lo, hi, self.rate_points as usize)).map(GridMode::Rates)
            }
            (None, None) => Err(usage(
                "choose a mode: either --rate-min/--rate-max (rate grid) or --M (explicit size)",
            )),
            _ => Err(usage("--rate-min and --rate-max must be given together")),
        }
    }
}

#[derive(Args)]
struct OutArgs {
    /// Write the artifact here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Channel file (JSON: inputs, outputs, W, optional prior and metric)
    #[arg(long, value_name = "PATH")]
    channel: PathBuf,
    /// Override the channel file's prior (JSON array)
    #[arg(long, value_name = "PATH")]
    prior: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Display summary rates in bits instead of nats
    #[arg(long)]
    bits: bool,
    #[command(flatten)]
    io: OutArgs,
}

#[derive(Args)]
struct WitnessArgs {
    /// Channel file; must not carry an explicit metric (witnesses are
    /// defined for maximum-likelihood decoding)
    #[arg(long, value_name = "PATH")]
    channel: PathBuf,
    /// Override the channel file's prior (JSON array)
    #[arg(long, value_name = "PATH")]
    prior: Option<PathBuf>,
    /// Rate at which to match the converse, in nats
    #[arg(long, value_name = "NATS")]
    rate: f64,
    /// Display summary rates in bits instead of nats
    #[arg(long)]
    bits: bool,
    #[command(flatten)]
    io: OutArgs,
}

#[derive(Args)]
struct McArgs {
    /// Channel file (JSON)
    #[arg(long, value_name = "PATH")]
    channel: PathBuf,
    /// Override the channel file's prior (JSON array)
    #[arg(long, value_name = "PATH")]
    prior: Option<PathBuf>,
    /// Codebook size for the random-coding experiment
    #[arg(long = "M", value_name = "M",
          value_parser = clap::value_parser!(u64).range(1..))]
    size: u64,
    /// Number of independent trials
    #[arg(long, value_name = "N",
          value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Seed for the deterministic per-trial random streams
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    io: OutArgs,
}

#[derive(Args)]
struct CodeEvalArgs {
    /// Channel file (JSON)
    #[arg(long, value_name = "PATH")]
    channel: PathBuf,
    /// Codebook file (JSON: {"codewords": [input labels]})
    #[arg(long, value_name = "PATH")]
    code: PathBuf,
    #[command(flatten)]
    io: OutArgs,
}

#[derive(Args)]
struct ProductArgs {
    #[command(subcommand)]
    kind: ProductKind,
}

#[derive(Subcommand)]
enum ProductKind {
    /// n-fold binary symmetric channel, uniform inputs, ML decoding
    Bsc(BscArgs),
    /// n-fold binary erasure channel, uniform inputs, ML decoding
    Bec(BecArgs),
}

#[derive(Args)]
struct BscArgs {
    /// Blocklength (number of channel uses)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Crossover probability, in (0, 1/2)
    #[arg(long)]
    p: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Display summary rates in bits instead of nats
    #[arg(long)]
    bits: bool,
    #[command(flatten)]
    io: OutArgs,
}

#[derive(Args)]
struct BecArgs {
    /// Blocklength (number of channel uses)
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Erasure probability, in (0, 1)
    #[arg(long)]
    eps: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Display summary rates in bits instead of nats
    #[arg(long)]
    bits: bool,
    #[command(flatten)]
    io: OutArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Seed for the certification fleets
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Optionally validate a channel file before running the fleets
    #[arg(long, value_name = "PATH")]
    channel: Option<PathBuf>,
    #[command(flatten)]
    io: OutArgs,
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn init_thread_pool() {
    if let Ok(raw) = std::env::var("FBL_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring FBL_THREADS={raw:?} (want a positive integer)"),
        }
    }
}

/// Writes the artifact to `--out` or stdout, always newline-terminated.
/// Returns true when it went to a file (so the summary may use stdout).
fn emit(artifact: &str, out: Option<&Path>) -> CliResult<bool> {
    let mut text = artifact.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| {
                usage(format!("cannot write {}: {e}", path.display()))
            })?;
            Ok(true)
        }
        None => {
            print!("{text}");
            Ok(false)
        }
    }
}

/// Prints the one-line summary on stdout when the artifact went to a file,
/// otherwise on stderr so the artifact stream stays clean.
fn summarize(line: &str, artifact_in_file: bool) {
    if artifact_in_file {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn rate_display(rate: f64, bits: bool) -> String {
    if bits {
        format!("{:.6} bits", rate / LN_2)
    } else {
        format!("{rate:.6} nats")
    }
}

fn load_config(path: &Path, prior_override: Option<&Path>) -> CliResult<ChannelConfig> {
    let cfg = load(ChannelConfig::from_path(path))?;
    match prior_override {
        None => Ok(cfg),
        Some(p) => {
            let prior = load(prior_from_path(p))?;
            load(ChannelConfig::new(cfg.channel, prior, cfg.metric))
        }
    }
}

fn render_curve(curve: &BoundCurve, format: Format) -> String {
    match format {
        Format::Csv => curve.to_csv(),
        Format::Json => curve.to_json(),
    }
}

fn curve_summary(curve: &BoundCurve, bits: bool) -> String {
    let n = curve.points.len();
    let lo = curve.points.first().map_or(0.0, |p| p.rate);
    let hi = curve.points.last().map_or(0.0, |p| p.rate);
    let width = curve
        .points
        .iter()
        .map(|p| p.clipped - p.exact)
        .fold(0.0f64, f64::max);
    let slopes: Vec<f64> = curve.points.iter().filter_map(|p| p.slope).collect();
    let slope_part = match (
        slopes.iter().copied().reduce(f64::min),
        slopes.iter().copied().reduce(f64::max),
    ) {
        (Some(lo_s), Some(hi_s)) => format!("slope in [{lo_s:.6}, {hi_s:.6}]"),
        _ => "slope undefined".to_string(),
    };
    format!(
        "{n} points, rate {} .. {}; max clipped-exact width {width:.6e}; {slope_part}",
        rate_display(lo, bits),
        rate_display(hi, bits),
    )
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_bounds(args: BoundsArgs) -> CliResult<()> {
    let cfg = load_config(&args.channel, args.prior.as_deref())?;
    let curve = match args.grid.mode()? {
        GridMode::Rates(rates) => {
            compute(bounds::sweep(&cfg.prior, &cfg.channel, &cfg.metric, &rates))?
        }
        GridMode::Size(m) => BoundCurve {
            points: vec![compute(bounds::point_for_size(
                &cfg.prior,
                &cfg.channel,
                &cfg.metric,
                m,
            ))?],
        },
    };
    let to_file = emit(&render_curve(&curve, args.format), args.io.out.as_deref())?;
    summarize(&curve_summary(&curve, args.bits), to_file);
    Ok(())
}

fn cmd_witness(args: WitnessArgs) -> CliResult<()> {
    let raw = fs::read_to_string(&args.channel)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.channel.display())))?;
    let value: serde_json::Value = serde_json::from_str(&raw)
        .map_err(|e| usage(format!("{}: {e}", args.channel.display())))?;
    if value.get("metric").is_some() {
        return Err(Failure {
            code: 1,
            message: "the matched witness is defined for maximum-likelihood decoding; \
                      remove the \"metric\" field from the channel file"
                .into(),
        });
    }
    let origin = args.channel.display().to_string();
    let mut cfg = load(ChannelConfig::from_json_str(&raw, &origin))?;
    if let Some(p) = args.prior.as_deref() {
        let prior = load(prior_from_path(p))?;
        cfg = load(ChannelConfig::new(cfg.channel, prior, cfg.metric))?;
    }
    if !(args.rate.is_finite() && args.rate >= 0.0) {
        return Err(usage(format!("--rate must be a finite non-negative value, got {}", args.rate)));
    }

    let witness = compute(matched_witness(&cfg.prior, &cfg.channel, args.rate))?;
    let metric = Metric::ml(&cfg.channel);
    let (beta, cdf) = compute(beta_vs_cdf(
        &cfg.prior,
        &cfg.channel,
        &metric,
        &witness.q_y,
        args.rate,
    ))?;
    let to_file = emit(&witness.to_json(&cfg.channel), args.io.out.as_deref())?;
    summarize(
        &format!(
            "witness at rate {}: |beta - F| = {:.3e} (beta {beta}, F {cdf}, eta {})",
            rate_display(args.rate, args.bits),
            (beta - cdf).abs(),
            witness.eta,
        ),
        to_file,
    );
    Ok(())
}

fn cmd_mc(args: McArgs) -> CliResult<()> {
    let cfg = load_config(&args.channel, args.prior.as_deref())?;
    let estimate = compute(random_coding_mc(
        &cfg.prior,
        &cfg.channel,
        &cfg.metric,
        args.size,
        args.trials,
        args.seed,
    ))?;
    let exact = compute(bounds::exact_rc_error(
        &cfg.prior,
        &cfg.channel,
        &cfg.metric,
        args.size as f64,
    ))?;
    let report = serde_json::json!({
        "estimate": estimate,
        "exact": exact,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
    let to_file = emit(&text, args.io.out.as_deref())?;
    let sigmas = if estimate.stderr > 0.0 {
        format!("{:.2}", (estimate.mean - exact).abs() / estimate.stderr)
    } else {
        "n/a".to_string()
    };
    summarize(
        &format!(
            "estimate {} +/- {} ({} trials, seed {}); exact {exact}; deviation {sigmas} sigma",
            estimate.mean, estimate.stderr, estimate.trials, estimate.seed,
        ),
        to_file,
    );
    Ok(())
}

fn cmd_code_eval(args: CodeEvalArgs) -> CliResult<()> {
    let cfg = load_config(&args.channel, None)?;
    let code = load(Codebook::from_path(&args.code, &cfg.channel))?;
    let check = compute(converse_equality_check(&code, &cfg.channel, &cfg.metric))?;
    let text = serde_json::to_string_pretty(&check).expect("report serialization cannot fail");
    let to_file = emit(&text, args.io.out.as_deref())?;
    summarize(
        &format!(
            "code error {}; threshold CDF at 1/{}: {}; gap {:.3e}",
            check.simulator_error,
            code.len(),
            check.cdf_value,
            check.gap.abs(),
        ),
        to_file,
    );
    Ok(())
}

fn cmd_product(args: ProductArgs) -> CliResult<()> {
    let (curve, format, bits, out) = match args.kind {
        ProductKind::Bsc(a) => {
            let spec = load(BscSpec::new(a.n as usize, a.p))?;
            let curve = match a.grid.mode()? {
                GridMode::Rates(rates) => compute(product::bsc_curve(&spec, &rates))?,
                GridMode::Size(m) => BoundCurve {
                    points: vec![compute(product::bsc_point_for_size(&spec, m))?],
                },
            };
            (curve, a.format, a.bits, a.io.out)
        }
        ProductKind::Bec(a) => {
            let spec = load(BecSpec::new(a.n as usize, a.eps))?;
            let curve = match a.grid.mode()? {
                GridMode::Rates(rates) => compute(product::bec_curve(&spec, &rates))?,
                GridMode::Size(m) => BoundCurve {
                    points: vec![compute(product::bec_point_for_size(&spec, m))?],
                },
            };
            (curve, a.format, a.bits, a.io.out)
        }
    };
    let to_file = emit(&render_curve(&curve, format), out.as_deref())?;
    summarize(&curve_summary(&curve, bits), to_file);
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> CliResult<()> {
    if let Some(path) = args.channel.as_deref() {
        load(ChannelConfig::from_path(path))?;
        eprintln!("validated channel file {}", path.display());
    }
    let reports = verify::run_all(args.seed);
    for r in &reports {
        eprintln!("{}", r.line());
    }
    let text = serde_json::to_string_pretty(&reports).expect("report serialization cannot fail");
    emit(&text, args.io.out.as_deref())?;
    if verify::all_passed(&reports) {
        Ok(())
    } else {
        let failing: Vec<&str> = reports
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name)
            .collect();
        Err(Failure {
            code: 1,
            message: format!("properties failed: {}", failing.join(", ")),
        })
    }
}

fn main() {
    let cli = Cli::parse();
    init_thread_pool();
    let result = match cli.cmd {
        Cmd::Bounds(a) => cmd_bounds(a),
        Cmd::Witness(a) => cmd_witness(a),
        Cmd::Mc(a) => cmd_mc(a),
        Cmd::CodeEval(a) => cmd_code_eval(a),
        Cmd::Product(a) => cmd_product(a),
        Cmd::Verify(a) => cmd_verify(a),
    };
    if let Err(f) = result {
        eprintln!("error: {}", f.message);
        std::process::exit(f.code);
    }
}
