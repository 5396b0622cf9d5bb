use thiserror::Error;

/// Errors raised across the lab.
///
/// The variants map onto three exit classes used by the command-line tool:
/// caller mistakes (`Input`, `Unsupported`, `ImpossibleObservation`, I/O and
/// parse failures), numerical breakdowns (`Numerical`) and broken internal
/// guarantees (`InvariantViolation`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("impossible observation: {0}")]
    ImpossibleObservation(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("internal invariant violation: {0}")]
    InvariantViolation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantViolation(msg.into())
    }

    /// Whether this error signals a bug (or numerical breakdown) rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::InvariantViolation(_) | Error::Numerical(_))
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Unsupported(_) => "unsupported",
            Error::ImpossibleObservation(_) => "impossible_observation",
            Error::Numerical(_) => "numerical",
            Error::InvariantViolation(_) => "invariant_violation",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
