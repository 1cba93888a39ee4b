//! `salso-kit`: point estimates of a clustering from posterior draws.
//!
//! Exit status is 0 on success and 2 on any input or validation error.

mod bench;
mod io;
mod report;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use salso_kit::estimators::estimator;
use salso_kit::oracle::{bell_numbers, brute_force_minimizer_capped, enumerate_partitions_capped};
use salso_kit::{ClusterLimit, LossSpec, SalsoConfig, SimilarityMatrix};

use crate::report::Report;

#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<salso_kit::Error> for CliError {
    fn from(e: salso_kit::Error) -> Self {
        Self(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self(format!("write failed: {e}"))
    }
}

#[derive(Parser)]
#[command(name = "salso-kit", version, about = "Bayesian clustering point estimates from posterior draws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a partition from a draws file.
    Estimate(EstimateArgs),
    /// Write the posterior similarity matrix.
    Psm(PsmArgs),
    /// Compare a SALSO configuration against the single greedy run on synthetic draws.
    Bench(BenchArgs),
    /// List all partitions of n items, or brute-force the optimum for a small draws file.
    Enumerate(EnumerateArgs),
}

#[derive(Args)]
struct DrawsArgs {
    /// CSV file with one draw per row and one item per column.
    #[arg(long)]
    draws: PathBuf,
    /// The first row of the draws file is a header.
    #[arg(long)]
    header: bool,
}

/// `auto`, `unconstrained` or a positive integer.
#[derive(Debug, Clone, Copy)]
struct MaxClusters(ClusterLimit);

impl FromStr for MaxClusters {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Self(ClusterLimit::Auto)),
            "unconstrained" => Ok(Self(ClusterLimit::Unconstrained)),
            other => match other.parse::<usize>() {
                Ok(k) if k > 0 => Ok(Self(ClusterLimit::Fixed(k))),
                _ => Err(format!("expected auto, unconstrained or a positive integer, got '{s}'")),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SearchArgs {
    /// Weight of splitting items that belong together.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    a: f64,
    /// Weight of merging items that belong apart.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, default_value = "auto")]
    max_clusters: MaxClusters,
    #[arg(long, default_value_t = 16)]
    runs: usize,
    /// Probability that a run starts with sequential allocation.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    p_sa: f64,
    #[arg(long, default_value_t = 10)]
    max_zealous: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads, 0 for all cores. Results do not depend on it.
    #[arg(long, env = "SALSO_KIT_THREADS", default_value_t = 0)]
    threads: usize,
}

impl SearchArgs {
    fn config(&self) -> SalsoConfig {
        SalsoConfig {
            n_runs: self.runs,
            p_sa: self.p_sa,
            max_clusters: self.max_clusters.0,
            max_zealous: self.max_zealous,
            seed: self.seed,
            n_workers: self.threads,
            ..SalsoConfig::default()
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: DrawsArgs,
    /// binder, omari, vi, gvi, nvi, nid, id, vi-lb, or the baselines draws and map.
    #[arg(long, default_value = "vi")]
    loss: String,
    /// Loss used to rank the draws when `--loss draws`.
    #[arg(long, default_value = "binder")]
    draws_loss: String,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value = "json")]
    output: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit wall-clock fields.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Args)]
struct PsmArgs {
    #[command(flatten)]
    input: DrawsArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 50)]
    scenarios: usize,
    /// Losses to compare, comma separated.
    #[arg(long, default_value = "binder,vi", value_delimiter = ',')]
    loss: Vec<String>,
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    k_true: usize,
    #[arg(long, default_value_t = 200)]
    h: usize,
    /// Label noise of the synthetic draws.
    #[arg(long, default_value_t = 0.4)]
    q: f64,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Number of items; ignored when `--draws` is given.
    #[arg(long, required_unless_present = "draws")]
    n: Option<usize>,
    /// Print only the number of partitions.
    #[arg(long)]
    count: bool,
    #[arg(long)]
    draws: Option<PathBuf>,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value = "binder")]
    loss: String,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value = "auto")]
    max_clusters: MaxClusters,
    /// Largest number of items to enumerate.
    #[arg(long, default_value_t = salso_kit::oracle::DEFAULT_ENUMERATION_CAP)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let draws = io::read_draws(&args.input.draws, args.input.header)?;
    let config = args.search.config();
    let (name, loss_name) = match args.loss.to_ascii_lowercase().as_str() {
        "draws" => ("draws", args.draws_loss.clone()),
        "map" => ("map", "zero-one".to_string()),
        other => ("salso", other.to_string()),
    };
    let spec = LossSpec::parse(&loss_name, args.search.a, args.search.b)?;
    let start = Instant::now();
    let result = estimator(name)?.estimate(&draws, &spec, &config)?;
    let report = Report {
        estimator: name,
        result: &result,
        seed: config.seed,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        timings: !args.no_timings,
    };
    let mut out = io::open_output(args.out.as_deref())?;
    match args.output {
        Format::Json => report.write_json(&mut out)?,
        Format::Csv => report.write_csv(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn psm(args: &PsmArgs) -> Result<(), CliError> {
    let draws = io::read_draws(&args.input.draws, args.input.header)?;
    let mut out = io::open_output(args.out.as_deref())?;
    io::write_psm(&mut out, &SimilarityMatrix::build(&draws))?;
    out.flush()?;
    Ok(())
}

fn bench_command(args: &BenchArgs) -> Result<(), CliError> {
    let losses = args
        .loss
        .iter()
        .map(|l| LossSpec::parse(l, args.search.a, args.search.b))
        .collect::<Result<Vec<_>, _>>()?;
    let config = args.search.config();
    let a = bench::Method {
        name: format!("salso(runs={} zealous={} p_sa={})", config.n_runs, config.max_zealous, config.p_sa),
        config: config.clone(),
    };
    let b = bench::Method {
        name: "greedy(runs=1 zealous=0 p_sa=0)".into(),
        config: SalsoConfig {
            max_clusters: config.max_clusters,
            ..SalsoConfig::rastelli_friel()
        },
    };
    let battery = bench::Battery {
        scenarios: args.scenarios,
        n: args.n,
        k_true: args.k_true,
        h: args.h,
        q: args.q,
        seed: config.seed,
    };
    // Open the output first so an unwritable path fails before any work.
    let mut out = io::open_output(args.out.as_deref())?;
    let rows = bench::run(&battery, &losses, &a, &b)?;
    bench::write_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

fn enumerate(args: &EnumerateArgs) -> Result<(), CliError> {
    let mut out = io::open_output(args.out.as_deref())?;
    if let Some(path) = &args.draws {
        let draws = io::read_draws(path, args.header)?;
        let spec = LossSpec::parse(&args.loss, args.a, args.b)?;
        let k = args.max_clusters.0.resolve(&draws)?;
        let best = brute_force_minimizer_capped(&draws, &spec, k, args.cap)?;
        let value = serde_json::json!({
            "loss": { "kind": spec.kind.name(), "a": report::float(spec.a), "b": report::float(spec.b) },
            "k_d_resolved": k,
            "expected_loss": report::float(best.loss),
            "minimizers": best.minimizers.iter().map(|m| m.as_slice()).collect::<Vec<_>>(),
        });
        serde_json::to_writer_pretty(&mut out, &value).map_err(std::io::Error::from)?;
        writeln!(out)?;
    } else {
        let n = args.n.expect("clap requires n without draws");
        if args.count {
            if n > 40 {
                return Err(CliError::new("Bell numbers above n = 40 overflow 128 bits"));
            }
            writeln!(out, "{}", bell_numbers(n)[n])?;
        } else {
            for p in enumerate_partitions_capped(n, args.cap)? {
                let line: Vec<String> = p.as_slice().iter().map(u32::to_string).collect();
                writeln!(out, "{}", line.join(","))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Psm(a) => psm(a),
        Command::Bench(a) => bench_command(a),
        Command::Enumerate(a) => enumerate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("salso-kit: {e}");
            ExitCode::from(2)
        }
    }
}
