use thiserror::Error;

/// Broad failure class, used by front ends to map errors onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Parse,
    Validation,
    Numeric,
    Bracket,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid scenario: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite state at t = {time} s on machine {machine}")]
    NonFinite { time: f64, machine: u32 },

    #[error("invalid group pattern: {0}")]
    InvalidPattern(String),

    #[error("inconsistent masses: {0}")]
    MassInconsistency(String),

    #[error("exhaustive enumeration supports at most {max} machines, got {n}")]
    TooManyMachines { n: usize, max: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("clearing-time bracket rejected: {0}")]
    Bracket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parse(_) | Error::Io(_) => ErrorCategory::Parse,
            Error::Validation(_)
            | Error::Dimension(_)
            | Error::InvalidPattern(_)
            | Error::MassInconsistency(_)
            | Error::TooManyMachines { .. }
            | Error::Empty(_) => ErrorCategory::Validation,
            Error::NonFinite { .. } => ErrorCategory::Numeric,
            Error::Bracket(_) => ErrorCategory::Bracket,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
