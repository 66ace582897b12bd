// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use log::error;

use args::Cli;

/// Why a run stopped early.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid configuration (exit 2).
    Config(String),
    /// A computation failed (exit 1).
    Runtime(String),
}

impl From<sgv_core::Error> for CliError {
    fn from(e: sgv_core::Error) -> Self {
        use sgv_core::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::BadExponent { .. }
            | E::DeltaTooLarge { .. }
            | E::HypothesisViolation { .. }
            | E::NonPositiveWarp { .. }
            | E::BadPoleClosure(_)
            | E::PoleEvaluation { .. }
            | E::Unreachable { .. } => Self::Config(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(format!("i/o: {e}"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SGV_LOG", "warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(violations) if violations.is_empty() => ExitCode::SUCCESS,
        Ok(violations) => {
            for v in &violations {
                eprintln!("violation: {v}");
            }
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            error!("{msg}");
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            error!("{msg}");
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
