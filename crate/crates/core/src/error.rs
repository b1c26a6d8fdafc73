use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building, solving, or serializing risk-score models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sparsity budget k={k} exceeds the number of features p={p}")]
    BudgetInfeasible { k: usize, p: usize },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("feature `{feature}` has non-binary value {value} in row {row}")]
    NonBinaryFeature { feature: String, row: usize, value: f64 },

    #[error("metric undefined: labels contain a single class")]
    SingleClass,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "instance too large for brute force (N={n}, p={p}, k={k}; limits N<={max_n}, p<={max_p}, k<={max_k}); pass force to override"
    )]
    SizeRefused {
        n: usize,
        p: usize,
        k: usize,
        max_n: usize,
        max_p: usize,
        max_k: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    IoBare(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl std::fmt::Display, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by the input data rather than by how the library was called.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::InvalidHyperparams(_))
    }
}
