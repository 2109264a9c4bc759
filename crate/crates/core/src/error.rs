use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("invalid fixed interval ({lo}, {hi}) for column {column}: lo must be below hi")]
    InvalidInterval { column: usize, lo: f64, hi: f64 },

    #[error("invalid binning: {0}")]
    InvalidBinning(String),

    #[error("column selection is empty")]
    EmptySelection,

    #[error("column index {index} out of range for {n_columns} columns")]
    ColumnOutOfRange { index: usize, n_columns: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("views carry different sample weights")]
    WeightMismatch,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid view: {0}")]
    InvalidView(String),

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("coordinate sets overlap or are empty: {0}")]
    InvalidCoordinates(String),

    #[error("at least {needed} features required, got {got}")]
    TooFewFeatures { needed: usize, got: usize },

    #[error("theorem hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Diverged { epoch: usize },

    #[error("non-finite value during {0}")]
    NonFiniteIntermediate(&'static str),

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("IDX format error at byte offset {offset}: {reason}")]
    Idx { offset: u64, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Diverged { .. } | Error::NonFiniteIntermediate(_) | Error::Io { .. }
        )
    }
}
