//! Error type of the command-line tool and its exit-code mapping.

use std::path::PathBuf;

use abel::AbelError;
use thiserror::Error;

/// Anything that can stop a command. Every variant maps to a distinct,
/// documented exit code; exit code 2 is reserved for argument parsing
/// (clap's default).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{0}")]
    Module(#[from] AbelError),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// The process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Parse { .. } => 4,
            CliError::Usage(_) => 5,
            CliError::Module(err) => match err {
                AbelError::InvalidArgument(_) => 5,
                AbelError::InvalidMesh(_) => 6,
                AbelError::DomainError(_) => 7,
                AbelError::DegenerateNode => 8,
                AbelError::SingularSystem(_) => 9,
                AbelError::OutOfRange(_) => 10,
                AbelError::InvalidMeasurement(_) => 11,
                AbelError::OracleFailure(_) => 12,
            },
        }
    }
}
