//! `squeeze`: regime comparisons, bound certification and point evaluations.
//!
//! Exit status is 0 on success, 1 when a certification or cross-check fails,
//! and 2 for usage errors, bad configuration or an unstable parameter point.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Flags, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] squeeze_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use squeeze_core::Error as E;
        match self {
            Self::Usage(_) => 2,
            Self::Core(
                E::Config(_) | E::OutOfRange(_) | E::InvalidDimension(_) | E::Unstable { .. },
            ) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "squeeze", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Homodyne-monitored steady states: closed form next to Riccati integration.
    Compare(Flags),
    /// No control vs coherent feedback vs homodyne monitoring over a grid.
    Sweep(Flags),
    /// Randomized certification of the N̄/2 bound over passive feedback loops.
    BoundSearch(Flags),
    /// Cross-check all solvers at one parameter point.
    Verify(Flags),
    /// Every regime at one parameter point.
    Point(Flags),
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (flags, handler): (&Flags, fn(&RunConfig) -> _) = match &cli.command {
        Command::Compare(f) => (f, commands::compare),
        Command::Sweep(f) => (f, commands::sweep),
        Command::BoundSearch(f) => (f, commands::bound_search),
        Command::Verify(f) => (f, commands::verify),
        Command::Point(f) => (f, commands::point),
    };
    let cfg = RunConfig::resolve(flags)?;
    let outcome = handler(&cfg)?;
    output::emit(&outcome.body, cfg.out.as_deref())?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("squeeze: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
