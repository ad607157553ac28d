use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid torus: {0}")]
    InvalidSpec(String),

    #[error("ambiguous lift: axis {axis} displacement is exactly half the period")]
    AmbiguousLift { axis: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("points {first} and {second} are at distance {distance}, below the required separation {required}")]
    NotSeparated {
        first: usize,
        second: usize,
        distance: f64,
        required: f64,
    },

    #[error("grid pitch {pitch} too coarse for radius {radius} in dimension {n}")]
    GridTooCoarse { pitch: f64, radius: f64, n: usize },

    #[error("covering certification failed after {rounds} repairs ({uncovered} cells left uncovered)")]
    CertificationFailed { rounds: usize, uncovered: usize },

    #[error("operation requires a maximality-certified point set")]
    Uncertified,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
