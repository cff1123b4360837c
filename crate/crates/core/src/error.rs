use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("frame mismatch: expected dimension {expected}, got {found}")]
    FrameMismatch { expected: usize, found: usize },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("degenerate plane: |X∧Y|² = {0:e} is below tolerance")]
    DegeneratePlane(f64),

    #[error("unknown Lie algebra family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("metric is not positive-definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("{what} violated: residual {residual:e} exceeds {tol:e}")]
    Invariant {
        what: String,
        residual: f64,
        tol: f64,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invariant(what: impl Into<String>, residual: f64, tol: f64) -> Self {
        Error::Invariant {
            what: what.into(),
            residual,
            tol,
        }
    }
}
