use std::path::PathBuf;

use thiserror::Error;

/// Every failure the pipeline can report. Messages carry the name of the
/// stage that produced them so CLI diagnostics are attributable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("hyperparams: {field} {reason}")]
    InvalidHyperparam { field: &'static str, reason: String },

    #[error("data: {0}")]
    InvalidData(String),

    #[error("data: non-finite value at row {row} col {col}")]
    NonFinite { row: usize, col: usize },

    #[error("{context}: dimension mismatch, expected {expected} got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("knn: k must be < N (k = {k}, N = {n})")]
    TooManyNeighbors { k: usize, n: usize },

    #[error("graph: {0}")]
    Graph(String),

    #[error("alias: probability at index {index} is negative ({value})")]
    NegativeProbability { index: usize, value: f64 },

    #[error("alias: probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("optimizer: non-finite parameter after epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("io: {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("io: {path}: row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("io: {path}: row {row} col {col}: cannot parse {token:?} as a number")]
    ParseValue {
        path: PathBuf,
        row: usize,
        col: usize,
        token: String,
    },

    #[error("io: {path}: row {row} col {col}: non-finite value")]
    NonFiniteValue {
        path: PathBuf,
        row: usize,
        col: usize,
    },

    #[error("io: {path}: file contains no data")]
    Empty { path: PathBuf },

    #[error("io: {path}: truncated payload, expected {expected} bytes got {found}")]
    Truncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("plot: {0}")]
    Plot(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
