use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("state is not normalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("amplitude is not finite")]
    NonFinite,

    #[error("direction is not a unit vector: squared length {norm_sqr}")]
    NonUnitDirection { norm_sqr: f64 },

    #[error("dimension {0} is not supported: need a prime or 4")]
    UnsupportedDimension(usize),

    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("expected dimension {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },

    #[error("{name} = {value} is outside 0..={max}")]
    OutOfRange {
        name: &'static str,
        value: usize,
        max: usize,
    },

    #[error("no basis with label {0}")]
    UnknownBasis(usize),

    #[error("{what} index {index} is out of range")]
    IndexOutOfRange { what: &'static str, index: usize },

    #[error("basis is not orthonormal: deviation {0:e}")]
    NotOrthonormal(f64),

    #[error("family is not mutually unbiased: deviation {0:e}")]
    NotUnbiased(f64),

    #[error("malformed family: {0}")]
    MalformedFamily(String),

    #[error("preparation is not a state of basis {0}")]
    PreparationNotInBasis(usize),

    #[error("strategy has no preparation basis")]
    MissingPrepBasis,

    #[error("guess and control bases do not partition the family: {0}")]
    PartitionViolation(String),

    #[error("assignment is not well-conditioned on basis {basis}")]
    IllConditioned { basis: usize },

    #[error("outcome probabilities sum to {0}")]
    CorruptDistribution(f64),

    #[error("prediction tie for control outcome {outcome} on diagonal {diagonal}")]
    PredictionTie { outcome: usize, diagonal: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by invalid user-supplied parameters.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::UnsupportedDimension(_)
                | Error::DimensionTooSmall(_)
                | Error::WrongDimension { .. }
                | Error::OutOfRange { .. }
                | Error::UnknownBasis(_)
                | Error::IndexOutOfRange { .. }
                | Error::MissingPrepBasis
                | Error::InvalidParameter(_)
        )
    }
}
