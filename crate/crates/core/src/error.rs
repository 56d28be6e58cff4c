use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("covariance is not symmetric: entry ({row}, {col}) differs from its transpose by {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Riccati iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// No complete assignment exists. `rows` is a set of rows whose admissible
    /// columns are fewer than the rows themselves.
    #[error("no feasible assignment: rows {rows:?} share only {columns} admissible columns")]
    Infeasible { rows: Vec<usize>, columns: usize },

    #[error("problem too large for exhaustive enumeration: {n_tracks} tracks + {n_detections} detections > {limit}")]
    SizeGuard {
        n_tracks: usize,
        n_detections: usize,
        limit: usize,
    },

    #[error("hypothesis count for {n_tracks} tracks and {n_detections} detections overflows 64 bits")]
    CountOverflow { n_tracks: usize, n_detections: usize },

    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context,
                expected,
                actual,
            })
        }
    }
}
