mod autocorr;
mod error;
mod estimate;
mod figures;
mod io;
mod simulate;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::{CliError, Result};
use io::OutDir;

#[derive(Parser)]
#[command(name = "flowbench", version, about = "Flow-control simulation and service-curve estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file (JSON); for `figures`, an optional directory of per-figure overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "flowbench-out")]
    out: PathBuf,
    /// Overrides the seeds in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent runs; defaults to the available cores.
    #[arg(long, global = true, env = "FLOWBENCH_JOBS")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs one scenario and writes per-packet, window and delay files.
    Simulate,
    /// Probes a scenario with constant-rate traffic and assembles a service curve.
    Estimate,
    /// Checks the delay bounds of an estimate against repeated trace runs.
    Validate,
    /// Window autocorrelation of one scenario.
    Autocorr,
    /// Regenerates the reference figures and their checks.
    Figures {
        /// Only these figures (4a, 4b, 5a, 5b, 7, 9, 12).
        #[arg(long = "figure", value_delimiter = ',')]
        only: Vec<String>,
    },
}

fn require(config: Option<&Path>) -> Result<&Path> {
    config.ok_or_else(|| CliError::Config("--config is required for this command".into()))
}

fn run(cli: &Cli) -> Result<i32> {
    let jobs = match cli.jobs {
        Some(0) => return Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let config = cli.config.as_deref();
    if let Command::Figures { only } = &cli.command {
        let out = OutDir::create(&cli.out)?;
        return figures::run(config, &out, cli.seed, jobs, only);
    }
    let config = require(config)?;
    let out = OutDir::create(&cli.out)?;
    match cli.command {
        Command::Simulate => simulate::run(config, &out, cli.seed)?,
        Command::Estimate => estimate::run(config, &out, cli.seed, jobs)?,
        Command::Validate => validate::run(config, &out, cli.seed, jobs)?,
        Command::Autocorr => autocorr::run(config, &out, cli.seed)?,
        Command::Figures { .. } => unreachable!(),
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("flowbench: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
