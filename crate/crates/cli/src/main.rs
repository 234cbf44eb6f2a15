//! `tgfield`: builds totally geodesic unit fields and writes verification artifacts.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Command, ConfigError, RunConfig, Settings, OUTPUT_DIR_ENV};
use tgfield_core::GeomError;

const EXIT_INPUT: u8 = 2;
const EXIT_TRUNCATED: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "tgfield", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// JSON file with settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_INPUT;
    }
    match err.downcast_ref::<GeomError>() {
        Some(GeomError::Numeric(_) | GeomError::DerivativeUnavailable(_)) | None => EXIT_NUMERIC,
        Some(_) => EXIT_INPUT,
    }
}

fn execute(cli: Cli) -> anyhow::Result<run::Outcome> {
    let file = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let flags = Settings {
        command: cli.command,
        ..cli.settings
    };
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let cfg = RunConfig::resolve(flags.over(file), env_dir)?;
    run::run(&cfg)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.truncated {
                eprintln!("stopped at a singularity before the requested span");
                ExitCode::from(EXIT_TRUNCATED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
