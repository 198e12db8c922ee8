use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A numerical evaluation left the domain where the approximation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("inspection {index}: expected {expected} values per variable, got {x} x and {y} y")]
    LengthMismatch {
        index: u32,
        expected: usize,
        x: usize,
        y: usize,
    },

    #[error("run already completed after {0} inspections")]
    RunCompleted(u32),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("chart `{0}` not found")]
    NotFound(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by malformed caller input rather than numerics or I/O.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::LengthMismatch { .. }
                | Error::InvalidSample(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
