use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph is not materialized (symbolic size only)")]
    NotMaterialized,

    #[error("insufficient materialization: {0}")]
    Materialization(String),

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    /// A certified comparison could not separate two quantities.
    #[error("indeterminate comparison: {0}")]
    Indeterminate(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("more horizon needed: {0}")]
    Horizon(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
