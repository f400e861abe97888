use core::fmt;

/// Errors raised by the planning core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Every cell of the world is an obstacle.
    NoFreeSpace,
    /// A query was issued against an empty point set.
    EmptySet,
    /// A radius, step or other strictly positive quantity was not positive.
    NonPositive(&'static str),
    /// A probability outside the open unit interval.
    InvalidProbability(f64),
    /// A parameter block failed validation.
    InvalidParameter(&'static str),
    /// A point lies outside the world or inside an obstacle where free space is required.
    PointInObstacle { x: f64, y: f64 },
    /// Matrix is not (numerically) positive definite.
    NotPositiveDefinite,
    /// Matrix that must be symmetric is not.
    NotSymmetric,
    /// Operand dimensions disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// Negative distance passed to a kernel.
    NegativeDistance(f64),
    /// Measurement outside the sensor's range.
    RangeOutOfBounds(f64),
    /// Not enough data for the requested operation.
    InsufficientData { needed: usize, found: usize },
    /// A mission could not make progress.
    Stalled { step: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NoFreeSpace => write!(f, "world has no free cell"),
            Error::EmptySet => write!(f, "query against an empty point set"),
            Error::NonPositive(what) => write!(f, "{what} must be strictly positive"),
            Error::InvalidProbability(p) => write!(f, "probability {p} is outside (0, 1)"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::PointInObstacle { x, y } => {
                write!(f, "point ({x}, {y}) is outside free space")
            }
            Error::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            Error::NotSymmetric => write!(f, "matrix is not symmetric"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NegativeDistance(r) => write!(f, "negative distance {r}"),
            Error::RangeOutOfBounds(z) => write!(f, "range {z} outside [0, r_max]"),
            Error::InsufficientData { needed, found } => {
                write!(f, "need at least {needed} data points, found {found}")
            }
            Error::Stalled { step } => {
                write!(f, "planner produced a root-only tree twice in a row at step {step}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
