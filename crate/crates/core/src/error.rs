use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid design space for `{variable}`: {reason}")]
    InvalidSpace { variable: String, reason: String },

    #[error("`{variable}` = {value} lies outside [{min}, {max}]")]
    OutOfBounds {
        variable: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("column {column} is constant (min = max = {value}); cannot scale")]
    DegenerateColumn { column: usize, value: f64 },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("R² undefined for target column {column}: constant over the evaluated rows")]
    UndefinedR2 { column: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("csv row {row}, column `{column}`: {message}")]
    Csv {
        row: usize,
        column: String,
        message: String,
    },

    #[error("csv header mismatch: expected `{expected}`, found `{found}`")]
    CsvHeader { expected: String, found: String },

    #[error("duplicate design at row {row} (first seen at row {first})")]
    DuplicateDesign { row: usize, first: usize },

    #[error("not enough records: need at least {required}, have {available}")]
    Sizing { required: usize, available: usize },

    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("training diverged at epoch {epoch}, batch {batch}: non-finite loss")]
    Divergence { epoch: usize, batch: usize },

    #[error("layer {layer}: {message}")]
    Dimension { layer: usize, message: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("individual {index} has not been evaluated")]
    Unevaluated { index: usize },

    #[error("population of {0} is too small for tournament selection")]
    PopulationTooSmall(usize),

    #[error("evaluator returned non-finite objectives for genes {genes:?}")]
    NonFiniteObjective { genes: Vec<f64> },

    #[error("{0}")]
    Precondition(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
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

    /// True for errors caused by user input (bad config, bad files) rather
    /// than by an internal failure.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Divergence { .. } | Error::NonFiniteObjective { .. })
    }
}
