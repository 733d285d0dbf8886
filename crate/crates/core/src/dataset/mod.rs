//! Trial ingestion, numeric matrices and the descriptive / correlation /
//! collinearity summaries computed before any causal analysis.

mod matrix;
mod records;
mod summary;

use std::path::PathBuf;

use thiserror::Error;

pub use matrix::{standardize, to_matrix, to_matrix_with, Aggregation, DataMatrix};
pub use records::{load_trials, write_trials, Measure, Schema, TrialRecord};
pub use summary::{describe, spearman_matrix, vif, DescriptiveRow, SpearmanMatrix};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed delimited text: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}`")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column `{column}`: Likert score {value} outside 1..=5")]
    LikertRange { row: usize, column: String, value: i64 },
    #[error("row {row}, column `{column}`: duration {value} must be finite and > 0")]
    NonPositiveDuration { row: usize, column: String, value: f64 },
    #[error("row {row}: trial index must be a positive integer, got {value}")]
    TrialIndex { row: usize, value: i64 },
    #[error("row {row}: duplicate trial (participant `{participant}`, condition `{condition}`, trial {trial})")]
    DuplicateTrial {
        row: usize,
        participant: String,
        condition: String,
        trial: u32,
    },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("non-finite value in column `{column}` at row {row}")]
    NonFinite { column: String, row: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("inconsistent matrix shape: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, DatasetError>;
