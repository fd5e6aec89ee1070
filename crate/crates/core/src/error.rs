use thiserror::Error;

use crate::combinatorics::{FQuad, Partition};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dimension mismatch: expected {expected} markers, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("divisor is not F-nef: F-curve {0} pairs negatively")]
    NotFNef(FQuad),
    #[error("strict base ({0}) is not an effective boundary")]
    StrictBaseInfeasible(Partition),
    #[error("malformed file: {0}")]
    Format(String),
    #[error("unsupported schema version {0}")]
    SchemaVersion(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
