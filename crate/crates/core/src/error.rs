use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch between {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op}: invalid shape {shape:?}: {reason}")]
    Shape {
        op: &'static str,
        shape: (usize, usize),
        reason: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("bound hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("one-sided Jacobi did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("failed to parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
