//! `gaussbomb`: config-driven runs of the bombardment models.

mod commands;
mod config;
mod exit;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::exit::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "gaussbomb", version, about = "Gaussian systems under repeated ancilla interactions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trajectory of the system state, discrete or interpolated (CSV).
    Evolve(CommonArgs),
    /// Fixed-point analysis and trajectory for an oscillator bath.
    Thermalize(CommonArgs),
    /// Complete-positivity margins of truncated generator series.
    CheckCp(CommonArgs),
    /// Which kinds of dynamics each series order contains.
    Classify(CommonArgs),
    /// Generator series coefficients as JSON.
    Series(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file. CSV for trajectories, JSON for reports.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Series order (0 to 3); overrides the config.
    #[arg(long)]
    order: Option<usize>,
    /// Seed for randomized sweeps; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cmd: Command) -> CliResult<()> {
    let (Command::Evolve(a)
    | Command::Thermalize(a)
    | Command::CheckCp(a)
    | Command::Classify(a)
    | Command::Series(a)) = &cmd;
    let mut cfg = config::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let out = a.out.as_deref();
    match &cmd {
        Command::Evolve(_) => commands::evolve(&cfg, out),
        Command::Thermalize(_) => commands::thermalize(&cfg, out),
        Command::CheckCp(_) => commands::check_cp(&cfg, a.order, out),
        Command::Classify(_) => commands::classify(&cfg, a.order, out),
        Command::Series(_) => commands::series_cmd(&cfg, a.order, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => CliError::Usage(String::new()).exit_code(),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gaussbomb: {e}");
            e.exit_code()
        }
    }
}
