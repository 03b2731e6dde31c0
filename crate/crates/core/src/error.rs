use thiserror::Error;

/// Which of the two samples an error refers to.
pub type SampleIndex = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient observations: need at least {needed}, have {have}")]
    InsufficientData { needed: usize, have: usize },

    #[error("singular covariance matrix ({0})")]
    SingularCovariance(&'static str),

    #[error("calibration undefined: {0}")]
    CalibrationUndefined(String),

    #[error("hypothesised mean lies outside the convex hull of sample {sample}")]
    OutsideHull { sample: SampleIndex },

    #[error("the convex hulls of the two samples do not overlap")]
    EmptyHullIntersection,

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("bootstrap failed: {0}")]
    Bootstrap(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
