use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{location}: malformed record: {message}")]
    Malformed { location: String, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("cannot stratify: {0}")]
    Stratify(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("provider {kind} failed after {attempts} attempt(s): {message}")]
    Provider {
        kind: String,
        attempts: u32,
        message: String,
    },

    #[error("protocol error from {kind} provider: {message}")]
    Protocol { kind: String, message: String },

    #[error("manifest mismatch: {0}")]
    Manifest(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
