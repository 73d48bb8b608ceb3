use thiserror::Error;

pub type Result<T, E = DpError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DpError {
    #[error("mass matrix is singular")]
    SingularMass,

    #[error("non-finite state after integration step")]
    NonFiniteState,

    #[error("requested {requested} RBF nodes exceeds the ceiling of {ceiling}")]
    Capacity { requested: u128, ceiling: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate firing: all rule strengths vanish")]
    DegenerateFiring,

    #[error("invalid gain: {0}")]
    InvalidGain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty series")]
    EmptySeries,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}
