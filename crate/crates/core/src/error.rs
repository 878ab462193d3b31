use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("free nilpotent algebra on {generators} generators of step {step} has dimension {dimension}, above the cap {cap}")]
    DimensionCap {
        generators: usize,
        step: usize,
        dimension: usize,
        cap: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dilation parameter must be positive, got {0}")]
    NonPositiveDilation(String),

    #[error("point {point} lies outside the chart domain")]
    OutsideChart { point: String },

    #[error("anchor at {point} is not surjective (rank {rank} < {dimension}); bracket condition fails there")]
    NotSurjective {
        point: String,
        rank: usize,
        dimension: usize,
    },

    #[error("limit along path is not a Lie subalgebra (defect {defect:e})")]
    LimitNotSubalgebra { defect: f64 },

    #[error("groupoid elements are not composable: {0}")]
    NotComposable(String),

    #[error("representation inconsistent with structure constants (defect {defect:e} > tol {tol:e})")]
    InconsistentRepresentation { defect: f64, tol: f64 },

    #[error("no representation catalog entry for stratum {0}")]
    UnclassifiedStratum(String),

    #[error("coefficient is not a trigonometric polynomial: {0}")]
    NonTrigCoefficient(String),

    #[error("flow left the chart at time {time} (state {state})")]
    ChartExit { time: f64, state: String },

    #[error("solver did not converge (best value {best_value}, residual {best_residual:e})")]
    NonConverged {
        best_value: f64,
        best_residual: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("model error at {path}: {message}")]
    Model { path: String, message: String },
}

impl Error {
    pub(crate) fn model(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Model {
            path: path.into(),
            message: message.into(),
        }
    }
}
