use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Scenario { path: String, message: String },

    #[error("{path}: line {line}: {message}")]
    ScenarioAt {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Table { path: String, message: String },

    #[error("figure: {0}")]
    Figure(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Core(#[from] dout_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
