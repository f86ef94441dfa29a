//! `walign` command line: `emd`, `compress`, `align`, `bench`, `gen`.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};

use super::experiment::{run_experiment, ExperimentConfig, ExperimentMethod};
use super::planted::generate_planted;
use crate::alignment::{align_with_compression, alternate_minimize, AlignmentConfig};
use crate::compression::{compress, Budget};
use crate::error::{AlignError, Result};
use crate::pointset::WeightedPointSet;
use crate::transport::{fractional_wasserstein, Backend, Regularization, TransportConfig};

#[derive(Debug, Parser)]
#[command(name = "walign", version, about = "Rigid alignment under the Wasserstein distance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plain or fractional Wasserstein distance between two point files.
    Emd(EmdArgs),
    /// Compress one point file.
    Compress(CompressArgs),
    /// Find a rigid transform of B that brings it close to A.
    Align(AlignArgs),
    /// Run a sweep described by a TOML config and print CSV.
    Bench(BenchArgs),
    /// Write a planted instance.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct TransportArgs {
    /// Transport solver: exact or sinkhorn.
    #[arg(long, default_value = "exact")]
    backend: Backend,
    /// Sinkhorn regularization as a multiple of the median ground cost.
    #[arg(long)]
    reg: Option<f64>,
}

impl TransportArgs {
    fn config(&self) -> TransportConfig {
        let mut cfg = TransportConfig { backend: self.backend, ..TransportConfig::default() };
        if let Some(r) = self.reg {
            cfg.sinkhorn_regularization = Regularization::RelativeToMedian(r);
        }
        cfg
    }
}

#[derive(Debug, Args)]
struct EmdArgs {
    a: PathBuf,
    b: PathBuf,
    /// Fraction of the lighter total weight to ship.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[command(flatten)]
    transport: TransportArgs,
    /// Also write the plan here.
    #[arg(long)]
    plan_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("budget").required(true).args(["k", "epsilon"])))]
struct CompressArgs {
    input: PathBuf,
    /// kcenter, kcenter+, kmeans, random or random+.
    #[arg(long, default_value = "kcenter")]
    method: String,
    #[arg(long)]
    k: Option<usize>,
    /// Target radius as a fraction of the estimated diameter (k-center only).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Center cap for --epsilon; defaults to the number of points.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("budget").args(["k", "rate", "epsilon"])))]
struct AlignArgs {
    a: PathBuf,
    b: PathBuf,
    /// original (no compression), kcenter, kcenter+, kmeans, random or random+.
    #[arg(long, default_value = "original")]
    method: String,
    #[arg(long)]
    k: Option<usize>,
    /// Compression rate; k = round(rate * (n1 + n2) / 2).
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 20)]
    max_rounds: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    transport: TransportArgs,
    /// Keep det R = +1.
    #[arg(long)]
    rotation_only: bool,
    /// Skip the principal-axes starting transform.
    #[arg(long)]
    no_axes_start: bool,
    /// Include stage timings in the report (makes reruns differ).
    #[arg(long)]
    timings: bool,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plan_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one row per trial here.
    #[arg(long)]
    trials_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Intrinsic dimension of the affine subspace holding A.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.0)]
    outliers: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_a: PathBuf,
    #[arg(long)]
    out_b: PathBuf,
    /// Write the planted transform (JSON) here.
    #[arg(long)]
    truth: Option<PathBuf>,
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_emd(args: EmdArgs, out: &mut dyn Write) -> Result<()> {
    let a = WeightedPointSet::load(&args.a)?;
    let b = WeightedPointSet::load(&args.b)?;
    let plan = fractional_wasserstein(&a, &b, args.lambda, &args.transport.config())?;
    if let Some(p) = &args.plan_out {
        std::fs::write(p, plan.to_text())?;
    }
    writeln!(out, "{}", plan.normalized_distance)?;
    Ok(())
}

fn run_compress(args: CompressArgs, out: &mut dyn Write) -> Result<()> {
    let p = WeightedPointSet::load(&args.input)?;
    let budget = match (args.k, args.epsilon) {
        (Some(k), _) => Budget::Centers(k),
        (None, Some(epsilon)) => Budget::Radius { epsilon, cap: args.cap.unwrap_or(p.len()) },
        (None, None) => unreachable!("clap enforces the budget group"),
    };
    let r = compress(&p, args.method.parse()?, budget, args.seed)?;
    emit(out, args.out.as_ref(), &r.to_text())
}

fn run_align(args: AlignArgs, out: &mut dyn Write) -> Result<()> {
    let a = WeightedPointSet::load(&args.a)?;
    let b = WeightedPointSet::load(&args.b)?;
    let cfg = AlignmentConfig {
        max_rounds: args.max_rounds,
        objective_tolerance: args.tol,
        fraction: args.lambda,
        transport: args.transport.config(),
        restarts: args.restarts,
        seed: args.seed,
        rotation_only: args.rotation_only,
        principal_axes_start: !args.no_axes_start,
    };
    let report = match args.method.parse::<ExperimentMethod>()? {
        ExperimentMethod::Original => alternate_minimize(&a, &b, &cfg)?,
        ExperimentMethod::Compressed(method) => {
            let budget = match (args.k, args.rate, args.epsilon) {
                (Some(k), _, _) => Budget::Centers(k),
                (_, Some(rate), _) => {
                    if !(rate > 0.0 && rate <= 1.0) {
                        return Err(AlignError::InvalidInput(format!("rate must lie in (0, 1], got {rate}")));
                    }
                    Budget::Centers(super::centers_for_rate(rate, a.len(), b.len()))
                }
                (_, _, Some(epsilon)) => Budget::Radius { epsilon, cap: a.len().max(b.len()) },
                _ => return Err(AlignError::InvalidInput(format!("method {method} needs --k, --rate or --epsilon"))),
            };
            align_with_compression(&a, &b, method, budget, &cfg)?
        }
    };
    if let Some(p) = &args.plan_out {
        std::fs::write(p, report.plan.to_text())?;
    }
    let mut json = report.to_json(args.timings);
    json.push('\n');
    emit(out, args.out.as_ref(), &json)
}

fn run_bench(args: BenchArgs, out: &mut dyn Write) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::from_toml(&text)?;
    let report = run_experiment(&cfg)?;
    for (method, gamma, lambda, trial, msg) in &report.failures {
        eprintln!("cell {method} gamma={gamma} lambda={lambda} trial={trial} failed: {msg}");
    }
    if let Some(p) = &args.trials_out {
        std::fs::write(p, report.trials_csv())?;
    }
    emit(out, args.out.as_ref(), &report.to_csv())
}

fn run_gen(args: GenArgs) -> Result<()> {
    let p = generate_planted(args.n, args.d, args.m, args.noise, args.outliers, args.seed)?;
    p.a.save(&args.out_a)?;
    p.b.save(&args.out_b)?;
    if let Some(path) = &args.truth {
        let json = serde_json::to_string_pretty(&p.truth.to_serialized()).expect("transform serializes");
        std::fs::write(path, json + "\n")?;
    }
    Ok(())
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn cli_run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let (stage, result) = match cli.command {
        Command::Emd(a) => ("emd", run_emd(a, out)),
        Command::Compress(a) => ("compress", run_compress(a, out)),
        Command::Align(a) => ("align", run_align(a, out)),
        Command::Bench(a) => ("bench", run_bench(a, out)),
        Command::Gen(a) => ("gen", run_gen(a)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "walign {stage}: {e}");
            if e.is_usage() {
                1
            } else {
                2
            }
        }
    }
}

/// Entry point used by the `walign` binary.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    cli_run(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
