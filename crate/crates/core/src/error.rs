use std::path::PathBuf;

/// Errors raised by the numerical routines and the file front ends.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature, root finder or refinement did not reach the requested accuracy.
    #[error("accuracy error in {context}: estimated error {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    Accuracy {
        context: String,
        estimate: f64,
        tolerance: f64,
    },

    /// The number of terms requested exceeds the configured cap.
    #[error("combinatorial size {requested} exceeds the maximum {max}")]
    TooLarge { requested: usize, max: usize },

    /// A structural invariant was violated (graph shape, tiling constraint, premise of a formula).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The field point is too close to a phase boundary to decide.
    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
