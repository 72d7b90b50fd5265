//! Batch front-end for `holelab-core`: reads a JSON run configuration,
//! runs one command and writes `sweep.csv` and `report.json`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure,
//! 4 INCONCLUSIVE continuation verdict under `--strict`, 1 output errors.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{execute, Outcome, Row};
pub use config::{Command, RunConfig};

use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {field}: {message}")]
    Config { field: String, message: String },
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Output(_) => 1,
        }
    }
}

pub const EXIT_INCONCLUSIVE: i32 = 4;

/// What a finished run wrote.
#[derive(Debug)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub report: PathBuf,
    pub outcome: Outcome,
}

/// Loads `config_path`, runs `command` and writes the artifacts. A
/// directory given on the command line wins over the one in the config;
/// the latter is relative to the config file.
pub fn run(
    command: Command,
    config_path: &Path,
    out_dir: Option<&Path>,
) -> Result<RunSummary, CliError> {
    let (config, raw) = config::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let resolved = config::resolve(command, &config, &base)?;
    let outcome = execute(&resolved)?;
    let dir = match (out_dir, &config.output.dir) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(d)) if d.is_relative() => base.join(d),
        (None, Some(d)) => d.clone(),
        (None, None) => PathBuf::from("."),
    };
    let report = output::report(&resolved, &outcome, raw, config.output.run_id.clone())?;
    let (csv, report) = output::write_artifacts(&dir, &outcome.rows, &report)?;
    Ok(RunSummary {
        csv,
        report,
        outcome,
    })
}
