use thiserror::Error;

/// Errors raised by the grid, model and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid axis: {0}")]
    InvalidAxis(String),

    #[error("grid must have 1 to 3 axes, got {0}")]
    InvalidDimension(usize),

    #[error("field length {got} does not match grid size {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("axis index {0} out of range")]
    AxisOutOfRange(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("non-finite values after step {step}; time step {tau} is likely too large")]
    NonFinite { step: usize, tau: f64 },

    #[error("{0}")]
    Study(String),
}

pub type Result<T> = std::result::Result<T, Error>;
