//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, fitting and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A value failed structural validation; `field` names the offending input.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    /// A geometric precondition failed (degenerate shape, pole collision, ...).
    #[error("geometry: {0}")]
    Geometry(String),

    /// Dimension mismatch between values that must agree.
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    Dimension {
        expected: usize,
        got: usize,
        context: String,
    },

    /// A degree-escalation loop exhausted its budget. The best report seen is
    /// attached so callers can inspect how close the fit came.
    #[error("budget exhausted: {message}")]
    BudgetExhausted {
        message: String,
        best: Box<crate::fit::FitReport>,
    },

    /// A stage of the series builder failed; the partially built series and
    /// its certificate-so-far are attached.
    #[error("build aborted at stage {stage}: {message}")]
    BuildAborted {
        stage: usize,
        message: String,
        partial: Box<crate::universal::UniversalSeries>,
    },

    /// A stored certificate does not match a fresh recomputation.
    #[error("certificate integrity failure at stage {stage}: {message}")]
    Integrity { stage: usize, message: String },

    /// Input/output or encoding failure for series/config files.
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn geometry(message: impl Into<String>) -> Self {
        Error::Geometry(message.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
