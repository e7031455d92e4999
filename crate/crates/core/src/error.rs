use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid gap set: {0}")]
    InvalidSet(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("root finding failed: {0}")]
    RootFind(String),

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),

    #[error("unsupported set: {0}")]
    UnsupportedSet(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
