use thiserror::Error;

/// Errors raised by the evaluation routines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("argument outside the supported sector: {0}")]
    Sector(String),
    #[error("bound regime not applicable: {0}")]
    Regime(String),
    #[error("index out of range: {0}")]
    Range(String),
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("invalid precision context: {0}")]
    Precision(String),
}

impl Error {
    /// True for errors caused by inputs outside an operation's domain or sector.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Sector(_) | Error::Regime(_) | Error::Range(_) | Error::Singular(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
