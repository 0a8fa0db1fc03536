//! `deframe`: degrade -> deblur -> evaluate experiment harness.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod errors;
mod imageio;
mod manifest;
mod pipeline;

use errors::{CliError, CliResult};
use manifest::Manifest;
use pipeline::Overrides;

#[derive(Parser)]
#[command(
    name = "deframe",
    version,
    about = "Semi-blind image deblurring experiments: degradation, restoration, parameter sweeps and quality metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Blur and noise an input image, writing y.png, y.f64 and k0.f64
    Degrade(CommonArgs),
    /// Restore a previously degraded observation; emits curves.csv and report.csv
    Deblur(CommonArgs),
    /// Cartesian parameter sweep; emits a PSNR-sorted leaderboard.csv
    Sweep(CommonArgs),
    /// Score an image pair (PSNR/SSIM/FSIM); emits metrics.csv
    Metrics(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the experiment manifest (TOML)
    manifest: PathBuf,
    /// Override the manifest's degradation seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the manifest's output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (also: DEFRAME_THREADS)
    #[arg(long)]
    threads: Option<usize>,
}

fn thread_count(args: &CommonArgs) -> Option<usize> {
    args.threads.or_else(|| {
        std::env::var("DEFRAME_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

type Runner = fn(&Manifest, &Overrides) -> CliResult<()>;

fn run(command: &Command) -> CliResult<()> {
    let (args, runner): (&CommonArgs, Runner) = match command {
        Command::Degrade(args) => (args, pipeline::run_degrade),
        Command::Deblur(args) => (args, pipeline::run_deblur),
        Command::Sweep(args) => (args, pipeline::run_sweep),
        Command::Metrics(args) => (args, pipeline::run_metrics),
    };
    if let Some(threads) = thread_count(args) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let manifest = Manifest::load(&args.manifest)?;
    let overrides = Overrides { seed: args.seed, out: args.out.clone() };
    runner(&manifest, &overrides)
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli.command) {
        eprintln!("deframe: {err}");
        std::process::exit(err.exit_code());
    }
}
