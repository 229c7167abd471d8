use thiserror::Error;

/// Errors raised by the statistics, null-distribution and testing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column {column} has tied values at rows {rows:?}")]
    TiesPresent { column: usize, rows: (usize, usize) },

    #[error("sample size {n} is too small, need at least {min}")]
    SampleTooSmall { n: usize, min: usize },

    #[error("dimension {p} is too small, need at least 2 variables")]
    DimensionTooSmall { p: usize },

    #[error("significance level {0} is outside (0, 1)")]
    InvalidAlpha(f64),

    #[error("kernel of order {expected} evaluated on {got} points")]
    WrongArity { expected: usize, got: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("not a permutation of 1..={n}: {reason}")]
    NotPermutation { n: usize, reason: String },

    #[error("invalid null specification: {0}")]
    InvalidNullSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
