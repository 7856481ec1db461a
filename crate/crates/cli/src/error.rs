use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invariant `{check}` violated at t = {t} (step {step}): {value:e} > {limit:e}")]
    Invariant {
        check: String,
        step: usize,
        t: f64,
        value: f64,
        limit: f64,
    },

    #[error(transparent)]
    Solver(#[from] granular_core::Error),
}

/// What goes to stderr when a command fails.
#[derive(Debug, Serialize)]
pub struct ErrorRecord<'a> {
    pub error: &'a str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<&'a str>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant { .. } => 3,
            CliError::Io { .. } | CliError::Solver(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Invariant { .. } => "invariant",
            CliError::Solver(_) => "solver",
        }
    }

    pub fn record(&self) -> ErrorRecord<'_> {
        ErrorRecord {
            error: self.kind(),
            message: self.to_string(),
            check: match self {
                CliError::Invariant { check, .. } => Some(check),
                _ => None,
            },
        }
    }
}
