use thiserror::Error;

/// Errors raised across the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A function was called with arguments outside its domain.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A policy, player, adversary or experiment was configured inconsistently.
    #[error("configuration error: {0}")]
    Config(String),
    /// The environment produced something the model forbids (e.g. a reward no
    /// transition interval covers).
    #[error("model violation: {0}")]
    ModelViolation(String),
    /// A party broke the round protocol of an episode.
    #[error("protocol error: {0}")]
    Protocol(String),
    /// Malformed text input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    /// An invariant of the library itself failed.
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
