use thiserror::Error;

/// Errors surfaced by validation and by the numerical engines.
///
/// `Invalid*` variants are input/validation failures; `Numerical` means an
/// engine failed to converge or an iteration budget was exhausted on valid
/// input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cost model: {0}")]
    InvalidCost(String),

    #[error("invalid quantile function: {0}")]
    InvalidQuantile(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad inputs rather than engine failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidCost(_)
                | Error::InvalidQuantile(_)
                | Error::InvalidInput(_)
                | Error::Domain(_)
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}
