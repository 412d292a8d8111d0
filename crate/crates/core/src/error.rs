use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric model parameter is outside its domain.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Structurally invalid input (bad edge list, size mismatch, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// An experiment configuration is unusable.
    #[error("config error: {0}")]
    Config(String),

    /// The searched range does not bracket the target probability.
    #[error("bracketing error: {0}")]
    Bracketing(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
