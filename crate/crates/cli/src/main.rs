//! `cheapci`: run coverage experiments, compute intervals from Stage-1
//! estimates or raw data, and calibrate overlapping-batch critical values.
//!
//! Exit codes: 0 on success, 1 on runtime or numerical failure, 2 on usage
//! or configuration errors.

mod config;

use std::fmt;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{Context, Result};
use cheapci::ci::{
    calibrate_ob_critical, ci_batched_jackknife, ci_cheap_bootstrap, ci_general_batching, ci_gs,
    ci_ob_su, ci_standard_batching, ci_weighted_cheap_bootstrap, IntervalResult,
};
use cheapci::functionals::io::{read_column, read_matrix, read_weighted_sample};
use cheapci::functionals::{Functional, WeightedMean, WeightedQuantile};
use cheapci::harness::{run_experiment_with_workers, Method, Precision, StageOnePlan};
use cheapci::schemes::{BatchScheme, CovarianceShape};
use cheapci::stats::{Probability, RngStream};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{CliConfig, Format};

/// An error caused by the invocation rather than by the computation.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let is_usage = e.chain().any(|c| {
        c.downcast_ref::<Usage>().is_some()
            || c.downcast_ref::<cheapci::Error>().is_some_and(|e| e.is_usage())
    });
    if is_usage {
        2
    } else {
        1
    }
}

#[derive(Parser)]
#[command(name = "cheapci", version, about = "Confidence intervals from a few black-box evaluations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coverage experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Confidence intervals.
    #[command(subcommand)]
    Ci(CiCommand),
    /// Critical values.
    #[command(subcommand)]
    Calibrate(CalibrateCommand),
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run the experiment described by a JSON configuration file.
    Run(RunArgs),
}

#[derive(Subcommand)]
enum CiCommand {
    /// Print `center,half_width,lower,upper` for one interval.
    Compute(ComputeArgs),
}

#[derive(Subcommand)]
enum CalibrateCommand {
    /// Simulate the overlapping-batch critical value.
    Ob(CalibrateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PrecisionArg(Precision);

impl FromStr for PrecisionArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "full" {
            return Ok(PrecisionArg(Precision::Full));
        }
        match s.parse::<usize>() {
            Ok(d) if (1..=17).contains(&d) => Ok(PrecisionArg(Precision::Significant(d))),
            _ => Err(format!("expected 1..=17 or `full`, got {s:?}")),
        }
    }
}

#[derive(Args)]
struct Output {
    /// Significant digits (1-17) or `full`.
    #[arg(long, default_value = "6")]
    precision: PrecisionArg,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configuration's `output`; standard output if neither is set.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides the configuration's `format` (default csv).
    #[arg(long)]
    format: Option<Format>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, env = "CHEAPCI_WORKERS", default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodTag {
    /// Equal batches.
    B,
    /// Batches of fractions `--gammas`.
    #[value(name = "b_gamma")]
    BGamma,
    /// Batched jackknife.
    Bj,
    /// Cheap bootstrap; the first estimate is the full-sample one.
    Cb,
    /// Weighted cheap bootstrap; needs `--sigma-w-sq`.
    Wcb,
    /// General interval; needs `--sigma`.
    Gs,
    /// Overlapping batches with the general interval; needs `--gamma`.
    #[value(name = "ob_new")]
    ObNew,
    /// Overlapping batches with simulated critical value; needs `--gamma`.
    #[value(name = "ob_su")]
    ObSu,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long, value_enum)]
    method: MethodTag,
    /// CSV with one Stage-1 estimate per row.
    #[arg(long, required_unless_present = "data", conflicts_with = "data")]
    estimates: Option<PathBuf>,
    /// CSV of raw observations; Stage-1 estimates are computed with `--functional`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// `mean`, `mean:<column>` or `quantile:<p>` (raw data only).
    #[arg(long, default_value = "mean")]
    functional: FunctionalArg,
    /// Number of Stage-1 estimates (raw data only).
    #[arg(long)]
    k: Option<usize>,
    /// Seed for resampling and calibration.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Overlapping batch fraction.
    #[arg(long)]
    gamma: Option<f64>,
    /// Comma-separated batch fractions.
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    /// Limiting variance of `n W_1` for the weighted bootstrap.
    #[arg(long)]
    sigma_w_sq: Option<f64>,
    /// CSV with the K x K covariance shape.
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Critical value for `ob_su`; simulated when omitted.
    #[arg(long)]
    critical: Option<f64>,
    /// Monte Carlo draws when simulating the `ob_su` critical value.
    #[arg(long, default_value_t = 1_000_000)]
    reps: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 1_000_000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Clone, Copy)]
enum FunctionalArg {
    Mean(usize),
    Quantile(f64),
}

impl FromStr for FunctionalArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, arg) = s.split_once(':').unwrap_or((s, ""));
        match (name, arg) {
            ("mean", "") => Ok(FunctionalArg::Mean(0)),
            ("mean", c) => c
                .parse()
                .map(FunctionalArg::Mean)
                .map_err(|_| format!("bad column in {s:?}")),
            ("quantile", p) => p
                .parse()
                .map(FunctionalArg::Quantile)
                .map_err(|_| format!("bad level in {s:?}")),
            _ => Err(format!("unknown functional {s:?}; use mean, mean:<column> or quantile:<p>")),
        }
    }
}

impl FunctionalArg {
    fn build(self) -> Result<Box<dyn Functional>> {
        Ok(match self {
            FunctionalArg::Mean(column) => Box::new(WeightedMean { column }),
            FunctionalArg::Quantile(p) => Box::new(WeightedQuantile::new(Probability::new(p)?)),
        })
    }
}

fn probability(x: f64, what: &str) -> Result<Probability> {
    Probability::new(x).with_context(|| format!("invalid {what}"))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn cmd_experiment(args: RunArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg = CliConfig::parse(&text)
        .map_err(|e| usage(format!("{}: {e}", args.config.display())))?;
    let experiment = cfg.experiment();
    experiment.validate()?;
    let report = run_experiment_with_workers(&experiment, args.workers)?;
    let precision = args.out.precision.0;
    let body = match args.format.or(cfg.format).unwrap_or(Format::Csv) {
        Format::Csv => report.to_csv(precision),
        Format::Markdown => report.to_markdown(precision),
    };
    match args.output.or(cfg.output) {
        Some(path) => {
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?
        }
        None => io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn method_of(tag: MethodTag, sigma_w_sq: Option<f64>) -> Result<Method> {
    Ok(match tag {
        MethodTag::B => Method::B,
        MethodTag::BGamma => Method::BGamma,
        MethodTag::Bj => Method::BJ,
        MethodTag::Cb => Method::CB,
        MethodTag::Wcb => Method::WCB {
            a: 1.0 / require(sigma_w_sq, "wcb", "--sigma-w-sq")?,
        },
        MethodTag::ObNew => Method::OBNew,
        MethodTag::ObSu => Method::OBSu,
        MethodTag::Gs => return Err(usage("method gs needs --estimates and --sigma")),
    })
}

fn require<T>(value: Option<T>, method: &str, flag: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("method {method} requires {flag}")))
}

fn ob_shape(k: usize, gamma: f64) -> Result<CovarianceShape> {
    Ok(BatchScheme::su_overlapping(k, gamma)?.covariance_shape()?)
}

fn interval(args: &ComputeArgs, y: &[f64], alpha: Probability) -> Result<IntervalResult> {
    let k = y.len();
    if k < 2 {
        return Err(usage("K must be ≥ 2"));
    }
    Ok(match args.method {
        MethodTag::B => ci_standard_batching(y, alpha)?,
        MethodTag::BGamma => {
            let g = require(args.gammas.as_deref(), "b_gamma", "--gammas")?;
            ci_general_batching(y, g, alpha)?
        }
        MethodTag::Bj => ci_batched_jackknife(y, alpha)?,
        MethodTag::Cb => ci_cheap_bootstrap(y, alpha)?,
        MethodTag::Wcb => {
            ci_weighted_cheap_bootstrap(y, require(args.sigma_w_sq, "wcb", "--sigma-w-sq")?, alpha)?
        }
        MethodTag::Gs => {
            let path = require(args.sigma.as_ref(), "gs", "--sigma")?;
            let m = read_matrix(open(path)?)?;
            ci_gs(y, &CovarianceShape::from_user(m)?, alpha)?
        }
        MethodTag::ObNew => {
            let g = require(args.gamma, "ob_new", "--gamma")?;
            ci_gs(y, &ob_shape(k, g)?, alpha)?
        }
        MethodTag::ObSu => {
            let g = require(args.gamma, "ob_su", "--gamma")?;
            let c = match args.critical {
                Some(c) => c,
                None => {
                    calibrate_ob_critical(
                        &ob_shape(k, g)?,
                        g,
                        alpha,
                        args.reps,
                        &RngStream::new(args.seed, 0),
                    )?
                    .value
                }
            };
            ci_ob_su(y, g, c, alpha)?
        }
    })
}

fn cmd_ci(args: ComputeArgs) -> Result<()> {
    let alpha = probability(args.alpha, "--alpha")?;
    let y = match (&args.estimates, &args.data) {
        (Some(path), _) => read_column(open(path)?)?,
        (None, Some(path)) => {
            let data = read_weighted_sample(open(path)?, None)?;
            let k = args.k.ok_or_else(|| usage("--data requires --k"))?;
            let method = method_of(args.method, args.sigma_w_sq)?;
            let plan = StageOnePlan::for_method(
                method,
                k,
                data.len(),
                args.gamma,
                args.gammas.as_deref(),
            )?;
            let f = args.functional.build()?;
            plan.estimates(&data, f.as_ref(), &RngStream::new(args.seed, 1))?
                .into_values()
        }
        (None, None) => unreachable!("clap requires one of --estimates and --data"),
    };
    let ci = interval(&args, &y, alpha)?;
    let p = args.out.precision.0;
    println!("center,half_width,lower,upper");
    println!(
        "{},{},{},{}",
        p.format(ci.center),
        p.format(ci.half_width),
        p.format(ci.lower()),
        p.format(ci.upper())
    );
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let alpha = probability(args.alpha, "--alpha")?;
    if args.k < 3 {
        return Err(usage("K must be ≥ 3"));
    }
    let shape = ob_shape(args.k, args.gamma)?;
    let c = calibrate_ob_critical(
        &shape,
        args.gamma,
        alpha,
        args.reps,
        &RngStream::new(args.seed, 0),
    )?;
    let p = args.out.precision.0;
    println!("critical,std_error,mc_reps");
    println!("{},{},{}", p.format(c.value), p.format(c.std_error), c.mc_reps);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Experiment(ExperimentCommand::Run(a)) => cmd_experiment(a),
        Command::Ci(CiCommand::Compute(a)) => cmd_ci(a),
        Command::Calibrate(CalibrateCommand::Ob(a)) => cmd_calibrate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
