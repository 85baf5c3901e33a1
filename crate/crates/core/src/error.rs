use thiserror::Error;

/// Errors raised by the geometric and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("unsupported manifold: {0}")]
    Unsupported(String),

    #[error("flow failed at iteration {iteration}: {reason}")]
    Flow { iteration: usize, reason: String },

    #[error("sweepout continuity violated between slices {first} and {second}: distance {distance:.4} exceeds bound {bound:.4}")]
    Continuity {
        first: usize,
        second: usize,
        distance: f64,
        bound: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
