use std::path::PathBuf;

/// Errors produced anywhere in the key generation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum SkgError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("target SNR {target_db:.2} dB is unreachable; maximum achievable is {max_db:.2} dB")]
    UnreachableSnr { target_db: f64, max_db: f64 },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: session {session} has {found} subcarriers, expected {expected}")]
    Shape {
        path: PathBuf,
        session: u64,
        expected: usize,
        found: usize,
    },

    #[error("channel trace exhausted after {available} realizations, {needed} needed")]
    TraceExhausted { needed: usize, available: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SkgError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SkgError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = SkgError> = std::result::Result<T, E>;
