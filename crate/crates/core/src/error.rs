use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one failure class
/// callers can act on (the CLI turns several of them into exit codes).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("argument outside the valid domain: {0}")]
    OutOfDomain(String),

    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),

    #[error("resource limit exceeded: {what} would need {requested}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("state outside the energy budget: mean energy {energy} is not below {budget}")]
    BudgetViolation { energy: f64, budget: f64 },

    #[error("construction failed after {} candidate(s)", scan_log.len())]
    ConstructionFailed { scan_log: Vec<String> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
