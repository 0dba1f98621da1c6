//! Error type shared by all solvers in the crate.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, CoreError>;

/// Errors raised by constructors and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// An argument violated a documented precondition.
    InvalidArgument(String),
    /// Two inputs that must share a dimension do not.
    DimensionMismatch { expected: usize, found: usize, what: &'static str },
    /// A log-domain exponent became non-finite; carries the offending entry.
    Overflow { row: usize, col: usize },
    /// An inner solve stopped before reaching the requested tolerance.
    ToleranceNotReached { requested: f64, achieved: f64 },
    /// The line search could not find a finite local curvature estimate.
    Divergence { iteration: usize, curvature: f64, doublings: u32 },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            CoreError::DimensionMismatch { expected, found, what } => {
                write!(f, "dimension mismatch for {what}: expected {expected}, found {found}")
            }
            CoreError::Overflow { row, col } => {
                write!(f, "non-finite exponent at entry ({row}, {col})")
            }
            CoreError::ToleranceNotReached { requested, achieved } => {
                write!(f, "tolerance not reached: requested {requested:e}, achieved {achieved:e}")
            }
            CoreError::Divergence { iteration, curvature, doublings } => {
                write!(
                    f,
                    "line search diverged at iteration {iteration}: \
                     no finite curvature after {doublings} doublings (last estimate {curvature:e})"
                )
            }
        }
    }
}

impl core::error::Error for CoreError {}

impl CoreError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CoreError::InvalidArgument(msg.into())
    }
}
