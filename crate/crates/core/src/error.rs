use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {n} outside supported range {min}..={max}")]
    DimensionOutOfRange { n: usize, min: usize, max: usize },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("parity mismatch: {0}")]
    ParityMismatch(String),

    #[error("vector is not unit length (|v| = {norm})")]
    NonUnit { norm: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("polyhedron is empty or unbounded: {0}")]
    NotAPolytope(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("not spacelike: {0}")]
    NonSpacelike(String),

    #[error("metric not positive definite at {location}")]
    DegenerateMetric { location: String },

    #[error("point {point:?} lies outside the sampled grid")]
    OutsideGrid { point: Vec<f64> },

    #[error("coefficient vector is not in the requested eigenspace (defect {defect:e})")]
    NotInEigenspace { defect: f64 },

    #[error("section vanishes identically on the segment")]
    ZeroSection,

    #[error("angle {0} outside (0, pi)")]
    InvalidAngle(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid file parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("expression error: {0}")]
    Expression(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(n: usize, min: usize, max: usize) -> Result<()> {
    if n < min || n > max {
        Err(Error::DimensionOutOfRange { n, min, max })
    } else {
        Ok(())
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::SizeMismatch { expected, found })
    }
}
