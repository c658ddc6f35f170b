use thiserror::Error;

/// Errors produced across the search pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("model `{0}` has no valid configuration")]
    EmptyPool(String),

    #[error("could not generate a satisfiable model after {attempts} attempts")]
    Generation { attempts: usize },

    #[error("value {value} of attribute `{attribute}` is outside the encoded range")]
    OutOfRange { attribute: String, value: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("oracle failed: {0}")]
    Oracle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
