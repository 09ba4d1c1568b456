use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    /// Every simulated pair was truncated away.
    #[error("empty sample: all {requested} simulated pairs were truncated")]
    EmptySample { requested: usize },

    #[error("k = {k} out of range [{min}, {max}]")]
    KOutOfRange { k: usize, min: usize, max: usize },

    #[error("degenerate tail: {0}")]
    DegenerateTail(String),

    /// The data contradict a model assumption (e.g. gamma1 >= gamma2).
    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("malformed input at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
