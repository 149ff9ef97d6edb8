use thiserror::Error;

use crate::field_ops::ScalarField;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain has an empty interior")]
    EmptyDomain,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("degenerate field: {0}")]
    DegenerateField(String),

    /// The iteration cap was hit; the last iterate is kept for inspection.
    #[error("no convergence after {iterations} iterations (last relative change {last_change:.3e})")]
    Convergence {
        iterations: usize,
        last_change: f64,
        last: Box<ScalarField>,
    },

    #[error("multistart minimizers disagree: best objective {best}, spread {spread:.3e}")]
    NonUnique { best: f64, spread: f64 },

    #[error("solver defect: {0}")]
    SolverDefect(String),

    #[error("radial oracle failure: {0}")]
    Oracle(String),

    #[error("data error: {0}")]
    Data(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
