use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error("invalid ontology: {0}")]
    InvalidOntology(String),

    #[error("invalid database: {0}")]
    InvalidDatabase(String),

    #[error("unknown slot `{0}`")]
    UnknownSlot(String),

    #[error("unknown value `{value}` for slot `{slot}`")]
    UnknownValue { slot: String, value: String },

    #[error("invalid dialogue act: {0}")]
    InvalidAct(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("backward called before a forward pass was recorded")]
    NoForwardPass,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("action `{0}` carries no slot; information gain is undefined")]
    NotInformationSeeking(String),

    #[error("mode violation: {0}")]
    Mode(String),

    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
