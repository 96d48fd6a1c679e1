use std::path::PathBuf;

use ask_core::AskError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    /// Bad flags, config keys or values; maps to exit code 1.
    #[error("{0}")]
    Usage(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Core(#[from] AskError),
}

impl BenchError {
    /// Process exit code: 1 for usage problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) | BenchError::Config { .. } => 1,
            BenchError::Core(AskError::InvalidConfig(_) | AskError::NotMinMax(_) | AskError::ZeroDimension) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
