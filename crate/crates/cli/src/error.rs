use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Command failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}", config_message(.key, .line, .message))]
    Config { key: Option<String>, line: Option<usize>, message: String },

    #[error("refusing to run: {0} (pass --force to override)")]
    Refused(String),

    #[error("cannot open {}: {source}", .path.display())]
    MissingInput { path: PathBuf, source: io::Error },

    #[error("malformed CSV {}: {message}", .path.display())]
    MalformedCsv { path: PathBuf, message: String },

    #[error("cannot write {}: {source}", .path.display())]
    Output { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Core(#[from] kgwave::Error),

    #[error("{0}")]
    Disagreement(String),
}

fn config_message(key: &Option<String>, line: &Option<usize>, message: &str) -> String {
    match (key, line) {
        (Some(k), Some(l)) => format!("config error at line {l} ({k}): {message}"),
        (Some(k), None) => format!("config error ({k}): {message}"),
        _ => format!("config error: {message}"),
    }
}

impl CliError {
    /// Exit status following the sysexits convention where one applies.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Refused(_) => 64,
            CliError::MalformedCsv { .. } => 65,
            CliError::MissingInput { .. } => 66,
            CliError::Output { .. } | CliError::Core(_) | CliError::Disagreement(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
