use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row}, column '{column}': cannot parse '{value}' as a number")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("unknown column '{name}' (available: {available})")]
    UnknownColumn { name: String, available: String },

    #[error("duplicate column name '{0}'")]
    DuplicateColumn(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("column mismatch: model expects column '{0}' which the table lacks")]
    ColumnMismatch(String),

    #[error("rank-deficient design: column '{column}' is linearly dependent on earlier columns")]
    RankDeficient { column: String },

    #[error("too few rows: need at least {needed}, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("column '{0}' has zero variance")]
    ZeroVariance(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: loss became non-finite")]
    Diverged { epoch: usize },

    #[error("no out-of-bag coverage: every row appears in every bootstrap sample")]
    NoOobCoverage,

    #[error("no factor structure: parallel analysis retained 0 factors; use a plain hidden-size sweep instead")]
    NoFactorStructure,

    #[error("fold {fold} failed: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
