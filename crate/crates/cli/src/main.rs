//! Command-line front end: `bench` runs timed algorithm/length cells,
//! `verify` checks cross-implementation agreement against tolerances, and
//! `simulate` emits a channel trajectory. Exit codes: 0 success, 1
//! verification failure, 2 usage or I/O errors.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hmm_parscan::{simulate, GeParams};
use hmm_parscan_cli::{
    emit, emit_simulation, run, verify, Algorithm, BenchConfig, ModelSource, OutputFormat,
    ThreadSpec, VerifyConfig, ALL_ALGORITHMS, DEFAULT_LOG_WEIGHT_TOLERANCE,
    DEFAULT_MARGINAL_TOLERANCE,
};

#[derive(Parser)]
#[command(
    name = "hmm-parscan",
    about = "Benchmark, verify, and simulate parallel-scan HMM inference",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time selected algorithms over selected chain lengths.
    Bench(BenchArgs),
    /// Check cross-implementation agreement against tolerances.
    Verify(VerifyArgs),
    /// Emit one simulated trajectory as CSV.
    Simulate(SimulateArgs),
}

/// Model selection shared by all subcommands: the built-in bursty channel
/// (`ge`, with optional parameter overrides) or a JSON model file.
#[derive(Args)]
struct ModelArgs {
    /// `ge` for the built-in channel model, or a path to a JSON model file.
    #[arg(long, default_value = "ge")]
    model: String,

    /// Probability of switching into the high-error regime.
    #[arg(long)]
    p0: Option<f64>,
    /// Probability of switching back to the low-error regime.
    #[arg(long)]
    p1: Option<f64>,
    /// Probability that the channel input bit flips.
    #[arg(long)]
    p2: Option<f64>,
    /// Bit error probability in the low-error regime.
    #[arg(long)]
    q0: Option<f64>,
    /// Bit error probability in the high-error regime.
    #[arg(long)]
    q1: Option<f64>,
}

impl ModelArgs {
    fn source(&self) -> anyhow::Result<ModelSource> {
        if self.model == "ge" {
            let mut params = GeParams::default();
            if let Some(v) = self.p0 {
                params.p0 = v;
            }
            if let Some(v) = self.p1 {
                params.p1 = v;
            }
            if let Some(v) = self.p2 {
                params.p2 = v;
            }
            if let Some(v) = self.q0 {
                params.q0 = v;
            }
            if let Some(v) = self.q1 {
                params.q1 = v;
            }
            Ok(ModelSource::Ge(params))
        } else {
            if [self.p0, self.p1, self.p2, self.q0, self.q1]
                .iter()
                .any(Option::is_some)
            {
                anyhow::bail!("channel parameter overrides apply only with --model ge");
            }
            Ok(ModelSource::File(PathBuf::from(&self.model)))
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    model: ModelArgs,

    /// Comma-separated chain lengths.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    lengths: Vec<usize>,

    /// Comma-separated algorithms (default: all six).
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<Algorithm>>,

    /// Repetitions per cell; default 10 for sequential and 100 for parallel
    /// algorithms.
    #[arg(long)]
    reps: Option<u32>,

    /// Base seed; each cell derives its own seed from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Worker count, or `auto` for hardware detection. Defaults to the
    /// HMM_PARSCAN_THREADS environment variable, then to hardware.
    #[arg(long)]
    threads: Option<ThreadSpec>,

    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,

    /// Output destination: a path, or `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,

    /// Comma-separated chain lengths.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    lengths: Vec<usize>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Worker count, or `auto`; same resolution as bench.
    #[arg(long)]
    threads: Option<ThreadSpec>,

    /// Largest tolerated marginal difference.
    #[arg(long, default_value_t = DEFAULT_MARGINAL_TOLERANCE)]
    marginal_tol: f64,

    /// Largest tolerated MAP log-weight difference.
    #[arg(long, default_value_t = DEFAULT_LOG_WEIGHT_TOLERANCE)]
    log_weight_tol: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,

    /// Number of steps to simulate.
    #[arg(long)]
    length: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output destination: a path, or `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

fn open_out(target: &str) -> anyhow::Result<Box<dyn Write>> {
    if target == "-" {
        Ok(Box::new(std::io::stdout().lock()))
    } else {
        Ok(Box::new(File::create(target).map_err(|e| {
            anyhow::anyhow!("cannot create {target}: {e}")
        })?))
    }
}

fn run_bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let config = BenchConfig {
        algorithms: args.algos.unwrap_or_else(|| ALL_ALGORITHMS.to_vec()),
        lengths: args.lengths,
        repetitions: args.reps,
        seed: args.seed,
        threads: args.threads,
        model_source: args.model.source()?,
        output_format: args.format,
    };
    let output = run(&config)?;
    for warning in &output.warnings {
        eprintln!("warning: {warning}");
    }
    let mut out = open_out(&args.out)?;
    emit(&output.records, config.output_format, &mut out)?;
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let config = VerifyConfig {
        lengths: args.lengths,
        seed: args.seed,
        threads: args.threads,
        model_source: args.model.source()?,
        marginal_tolerance: args.marginal_tol,
        log_weight_tolerance: args.log_weight_tol,
    };
    let report = verify(&config)?;
    print!("{}", report.render());
    if report.passed() {
        println!("verification passed");
        Ok(ExitCode::SUCCESS)
    } else {
        for breach in report.breaches() {
            eprintln!("verification failure: {breach}");
        }
        Ok(ExitCode::from(1))
    }
}

fn run_simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let model = args.model.source()?.load()?;
    let sim = simulate(&model, args.length, args.seed)?;
    let mut out = open_out(&args.out)?;
    emit_simulation(&sim, &mut out)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(args) => run_bench(args),
        Command::Verify(args) => run_verify(args),
        Command::Simulate(args) => run_simulate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
