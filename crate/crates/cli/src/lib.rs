//! Front end of the `ndrop` binary: configuration, subcommands and artifacts.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("{path}: {source}")]
    Path {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] nonlocal_drop::Error),

    #[error("{failed} of {total} verification checks failed")]
    ChecksFailed { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Machine-readable form of a failed run.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub schema_version: u32,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub keys: Vec<String>,
    pub exit_code: i32,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::UnknownKeys(_) => "unknown-keys",
            CliError::Path { .. } => "path",
            CliError::Core(nonlocal_drop::Error::Precondition(_)) => "precondition",
            CliError::Core(nonlocal_drop::Error::Parameter { .. }) => "parameter",
            CliError::Core(nonlocal_drop::Error::Parse { .. }) => "parse",
            CliError::Core(_) => "computation",
            CliError::ChecksFailed { .. } => "checks-failed",
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => "io",
        }
    }

    /// 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownKeys(_) | CliError::Path { .. } => 2,
            CliError::Core(nonlocal_drop::Error::Parameter { .. } | nonlocal_drop::Error::Parse { .. }) => 2,
            _ => 1,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            schema_version: output::SCHEMA_VERSION,
            kind: self.kind(),
            message: self.to_string(),
            keys: match self {
                CliError::UnknownKeys(k) => k.clone(),
                _ => Vec::new(),
            },
            exit_code: self.exit_code(),
        }
    }
}
