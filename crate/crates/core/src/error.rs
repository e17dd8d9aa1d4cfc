use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("window length {window} is out of range for a series of length {len} (need 1 < L < T/2)")]
    WindowOutOfRange { window: usize, len: usize },

    #[error("non-finite value at position {index}")]
    NonFiniteInput { index: usize },

    #[error("matrix has an empty dimension ({rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("maximum lag {max_lag} must be smaller than the series length {len}")]
    LagOutOfRange { max_lag: usize, len: usize },

    #[error("expected a {expected} matrix, got {found}")]
    VariantMismatch { expected: &'static str, found: &'static str },

    #[error("symmetric eigensolver did not converge for a {dim}x{dim} matrix")]
    ConvergenceFailure { dim: usize },

    #[error("grouping has no bands and no residual name")]
    EmptyGrouping,

    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),

    #[error("window length {window} is not a multiple of 12")]
    NotMonthlyCompatible { window: usize },

    #[error("series has zero w-norm")]
    ZeroNorm,

    #[error("series lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("series too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("regressor has zero variance")]
    DegenerateRegressor,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("column {0} not present")]
    ColumnMissing(String),

    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumericCell { row: usize, column: String, value: String },

    #[error("dates are not strictly increasing at row {row}")]
    NonMonotoneDates { row: usize },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse classification used by the command-line front end to pick an exit
/// code and a machine-parsable error tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Input,
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::WindowOutOfRange { .. }
            | Error::LagOutOfRange { .. }
            | Error::VariantMismatch { .. }
            | Error::EmptyGrouping
            | Error::InvalidGrouping(_)
            | Error::NotMonthlyCompatible { .. }
            | Error::InvalidParams(_)
            | Error::Config { .. } => ErrorClass::Usage,
            Error::NonFiniteInput { .. }
            | Error::EmptyMatrix { .. }
            | Error::LengthMismatch { .. }
            | Error::TooShort { .. }
            | Error::FileNotFound(_)
            | Error::ColumnMissing(_)
            | Error::NonNumericCell { .. }
            | Error::NonMonotoneDates { .. }
            | Error::Io(_)
            | Error::Csv(_) => ErrorClass::Input,
            Error::ConvergenceFailure { .. } | Error::ZeroNorm | Error::DegenerateRegressor => {
                ErrorClass::Numeric
            }
        }
    }

    /// Stable identifier for the error category.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::WindowOutOfRange { .. } => "WindowOutOfRange",
            Error::NonFiniteInput { .. } => "NonFiniteInput",
            Error::EmptyMatrix { .. } => "EmptyMatrix",
            Error::LagOutOfRange { .. } => "LagOutOfRange",
            Error::VariantMismatch { .. } => "VariantMismatch",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::EmptyGrouping => "EmptyGrouping",
            Error::InvalidGrouping(_) => "InvalidGrouping",
            Error::NotMonthlyCompatible { .. } => "NotMonthlyCompatible",
            Error::ZeroNorm => "ZeroNorm",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::TooShort { .. } => "TooShort",
            Error::DegenerateRegressor => "DegenerateRegressor",
            Error::InvalidParams(_) => "InvalidParams",
            Error::FileNotFound(_) => "FileNotFound",
            Error::ColumnMissing(_) => "ColumnMissing",
            Error::NonNumericCell { .. } => "NonNumericCell",
            Error::NonMonotoneDates { .. } => "NonMonotoneDates",
            Error::Config { .. } => "Config",
            Error::Io(_) => "IoFailure",
            Error::Csv(_) => "IoFailure",
        }
    }
}
