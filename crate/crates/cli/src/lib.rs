//! Command-line harness for `structcodes-core`: experiment configs, seeded
//! parallel Monte Carlo runs, rate sweeps, network files, and CSV/JSON output.
//!
//! Trial `i` of a run with master seed `s` draws from ChaCha20 seeded with `s`
//! on stream `i` (see [`structcodes_core::trial_rng`]), so results do not depend
//! on how trials are spread over worker threads.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::Path;

pub mod config;
pub mod netcmd;
pub mod netfile;
pub mod simulate;
pub mod sweep;
pub mod table;

pub use config::{ExperimentConfig, Format, ModeArg};
pub use table::{Cell, ResultTable};

/// Name and version stamped into every output.
pub const PROVENANCE: &str = concat!("structcodes ", env!("CARGO_PKG_VERSION"), " (trial rng: chacha20, seed=master, stream=trial index)");

/// Caps the number of worker threads.
pub const THREADS_ENV: &str = "STRUCTCODES_THREADS";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("guard violation: {0}")]
    Guard(String),
    #[error("validation failed:\n{0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } | CliError::Io(_) => 2,
            CliError::Guard(_) | CliError::Validation(_) => 3,
        }
    }

    pub(crate) fn from_json(e: serde_json::Error) -> Self {
        CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }

    pub(crate) fn guard(e: impl std::fmt::Display) -> Self {
        CliError::Guard(e.to_string())
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Worker count from the environment, if set to a positive integer.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}

/// Render a table in the requested format.
pub fn render(table: &ResultTable, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

/// Write to `path`, or stdout when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
