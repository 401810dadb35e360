use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by how the CLI maps them to exit codes: input and
/// configuration problems exit with 2, runtime/numeric failures with 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("csv error at {path}, row {row}, column {column}: {message}")]
    CsvData {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for usage/input errors, 1 for
    /// runtime and numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::Config(_)
            | Error::Schema(_)
            | Error::CsvData { .. }
            | Error::Io { .. } => 2,
            Error::ShapeMismatch(_) | Error::NonFinite(_) | Error::Checkpoint(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
