use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("refinement did not converge: {0}")]
    NonConvergent(String),
    #[error("spectrum tail above tolerance: {0}")]
    Tail(String),
    #[error("integral diverges: {reason}")]
    Divergent { reason: String, trace: Vec<f64> },
    #[error("derivative of order {needed} requested but bundle depth is {depth}")]
    MissingDerivative { needed: usize, depth: usize },
    #[error("series truncation failed: {0}")]
    Truncation(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn divergent(reason: impl Into<String>, trace: Vec<f64>) -> Self {
        Error::Divergent {
            reason: reason.into(),
            trace,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
