//! `squeezechain` command-line front end.
//!
//! Exit codes: 0 success, 1 oracle check failed, 2 invalid input,
//! 3 computation error.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use squeezechain::Error;

use crate::config::{Cli, Resolved};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Compute(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::WindowTooLong { .. }
            | Error::InsufficientSizes { .. }
            | Error::SizeTooLarge { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let config = cli.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let (table, summary) = pool.install(|| commands::run(&config.command))?;
    let passed = match &config.command {
        Resolved::OracleCheck(_) => summary["failures"] == 0,
        _ => true,
    };
    output::emit(&config, &table, summary)?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
