use std::path::PathBuf;

use thiserror::Error;

use crate::pgm::PgmError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({row}, {col}) lies outside the {height}x{width} field")]
    OutOfBounds {
        row: i64,
        col: i64,
        height: usize,
        width: usize,
    },

    #[error("pixel ({row}, {col}) is not filled")]
    Unfilled { row: i64, col: i64 },

    #[error("target pixel ({row}, {col}) lies inside the seed region")]
    InsideSeed { row: i64, col: i64 },

    #[error("empty candidate set: observed image smaller than conditioning shape")]
    EmptyCandidates,

    #[error("shape mismatch: expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("evaluation grids differ")]
    GridMismatch,

    #[error("observed image {height}x{width} is smaller than the {side}x{side} seed")]
    ObservedTooSmall { height: usize, width: usize, side: usize },

    #[error("invalid Markov mesh spec: {0}")]
    Spec(String),

    #[error("enumeration needs {needed} configurations, limit is {limit}; use a smaller alphabet or window")]
    EnumerationTooLarge { needed: u128, limit: u128 },

    #[error("Markov mesh spec is not stationary within the enumeration buffer (law drift {gap:e})")]
    NotStationary { gap: f64 },

    #[error("spec does not exhibit the counterexample: true conditional mutual information is {0:e} nats")]
    NoCounterexample(f64),

    #[error(transparent)]
    Pgm(#[from] PgmError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
