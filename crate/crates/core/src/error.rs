use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the screening toolkit.
#[derive(Debug, Error)]
pub enum ScreenError {
    #[error("column `{0}` not found in header")]
    MissingColumn(String),

    #[error("cannot parse `{value}` as a number at row {row}, column `{column}`")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite value at row {row}, column `{column}`")]
    NonFinite { row: usize, column: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),

    #[error("column is constant; {0} is undefined")]
    DegenerateColumn(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("empirical-likelihood solver did not converge after {iterations} iterations (bracket [{lo}, {hi}])")]
    SolverFailure { iterations: usize, lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("replication {rep}: {source}")]
    Replication {
        rep: usize,
        #[source]
        source: Box<ScreenError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ScreenError>;

impl ScreenError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ScreenError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input rather than an internal fault.
    pub fn is_validation(&self) -> bool {
        match self {
            ScreenError::SolverFailure { .. } => false,
            ScreenError::Replication { source, .. } => source.is_validation(),
            _ => true,
        }
    }
}
