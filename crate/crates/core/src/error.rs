use thiserror::Error;

/// Errors shared by the geometry, network and protocol layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("points coincide")]
    CoincidentPoints,
    #[error("sensors {0} and {1} coincide")]
    CoincidentSensors(usize, usize),
    #[error("sensor network has no anchors")]
    EmptyAnchorSet,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid network at `{field}`: {message}")]
    InvalidNetwork { field: String, message: String },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("bearing basis is collinear (|det| = {0:.3e})")]
    CollinearBasis(f64),
    #[error("bearing rays are collinear (|det| = {0:.3e})")]
    CollinearRays(f64),
    #[error("network generation failed: {0}")]
    GenerationFailed(String),
    #[error("sparsity pattern is not chordal: {0}")]
    NotDecomposable(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
