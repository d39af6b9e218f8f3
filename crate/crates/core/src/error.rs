use thiserror::Error;

/// Errors surfaced by topology construction, scheduling and the simulation driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The exact factor update would enumerate more joint neighbor states than allowed.
    #[error("factor update for user {user} needs {size} joint terms (cap {cap}); use the approximate update")]
    EnumerationCap { user: usize, size: u128, cap: u128 },

    #[error("exhaustive search space has {size} candidates (cap {cap})")]
    SearchSpace { size: u128, cap: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
