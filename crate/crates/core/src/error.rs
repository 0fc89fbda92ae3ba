use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("factor index {index} out of range for a layout with {factors} factors")]
    IndexOutOfRange { index: usize, factors: usize },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("map is not a valid channel: {0}")]
    NotCptp(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("insufficient certified data: {got} points, need at least {need}")]
    InsufficientData { got: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
