//! Config-driven command-line front end for the ghost interference and
//! diffraction simulator.
//!
//! Subcommands: `pattern` (detector-sweep CSV), `intensity` (signal-arm
//! profile CSV), `validate` (oracle-agreement report). Exit codes:
//! 0 success, 1 validation checks failed, 2 configuration error, 3 runtime
//! error.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;

#[derive(Parser)]
#[command(name = "ghostbeam", version, about = "Ghost interference-diffraction simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output file (defaults: pattern.csv / intensity.csv / validation.txt)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the oracle seed from the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress the summary printed to standard output
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the idler detector and write the ghost pattern as CSV
    Pattern { config: PathBuf },
    /// Run the oracle-agreement suite and write the report
    Validate { config: PathBuf },
    /// Write the signal-arm intensity profile as CSV
    Intensity { config: PathBuf },
}

fn load_config(path: &Path) -> Result<config::ValidatedConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    config::parse_config(&text, dir).map_err(CliError::Config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Pattern { config } => {
            let cfg = load_config(config)?;
            commands::run_pattern(&cfg, cli.out, cli.quiet)
        }
        Command::Validate { config } => {
            let cfg = load_config(config)?;
            commands::run_validate(&cfg, cli.out, cli.seed, cli.quiet)
        }
        Command::Intensity { config } => {
            let cfg = load_config(config)?;
            commands::run_intensity(&cfg, cli.out, cli.quiet)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
