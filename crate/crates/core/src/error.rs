use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point outside the support of a target, or an invalid distribution parameter.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs that cannot be combined (dimension mismatch, rank-deficient design, ...).
    #[error("setup error: {0}")]
    Setup(String),

    #[error("insufficient sample: {0}")]
    InsufficientSample(String),

    #[error("unsupported polynomial degree {0} (supported degrees: 1, 2, 3)")]
    UnsupportedDegree(usize),

    /// The sampler met a non-finite log density at a state that should be valid.
    #[error("non-finite log density at state {state:?}")]
    NonFinite { state: Vec<f64> },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("load error in {path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn load(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Load {
            path: path.into(),
            message: message.into(),
        }
    }
}
