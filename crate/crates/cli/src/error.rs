use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, or plot input missing data. Exit code 2.
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },
    /// A module refused or failed a computation. Exit code 3.
    #[error("numerical failure in {context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: matterwave::Error,
    },
    /// Reading or writing files failed. Exit code 4.
    #[error("i/o failure on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn numerical(context: impl Into<String>, source: matterwave::Error) -> Self {
        CliError::Numerical {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
