use thiserror::Error;

/// Crate-wide error type.
///
/// The CLI maps `Input`, `Rank` and `Domain` to exit code 1 (bad input) and
/// `Capacity`, `Divergence` and `Construction` to exit code 2 (numerical
/// failure).
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("rank error: {0}")]
    Rank(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
