use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hdmd::Par;
use hdmd_cli::{run_custom, run_probes, run_schrodinger, CliError, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "hdmd", version, about = "Hermitian DMD experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (`hdmd-config 1` key-value file).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Harmonic oscillator benchmark.
    Schrodinger {
        #[command(flatten)]
        common: Common,
        /// Use the 300×300 grid instead of the configured one.
        #[arg(long)]
        full_grid: bool,
    },
    /// Finite-section convergence probes.
    Probes {
        #[command(flatten)]
        common: Common,
    },
    /// EDMD and Hermitian DMD on snapshot CSVs.
    Custom {
        #[command(flatten)]
        common: Common,
        /// States x_m, one per row, with a header line.
        #[arg(long)]
        x: PathBuf,
        /// Successor states y_m, aligned with --x.
        #[arg(long)]
        y: PathBuf,
    },
}

fn setup(common: &Common) -> Result<ExperimentConfig, CliError> {
    let threads = common.threads.max(1);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    hdmd::set_global_parallelism(if threads == 1 { Par::Seq } else { Par::rayon(threads) });
    match &common.config {
        Some(path) => ExperimentConfig::from_file(path),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Schrodinger { common, full_grid } => {
            let cfg = setup(&common)?;
            run_schrodinger(&cfg, &RunOptions { out: common.out, full_grid })
        }
        Command::Probes { common } => {
            let cfg = setup(&common)?;
            run_probes(&cfg, &RunOptions { out: common.out, full_grid: false })
        }
        Command::Custom { common, x, y } => {
            let cfg = setup(&common)?;
            run_custom(&cfg, &RunOptions { out: common.out, full_grid: false }, &x, &y)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("HDMD_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hdmd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
