use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// Variants are split into validation failures (bad input, exit code 1 at
/// the command line) and runtime failures (exit code 2); see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no series within {budget} after {max_terms} terms for {family}")]
    NoConvergence {
        family: String,
        budget: f64,
        max_terms: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("non-finite value in layer {layer}: {detail}")]
    NonFinite { layer: usize, detail: String },

    #[error("training diverged at step {step} (loss {loss}, layer {layer:?})")]
    Divergence {
        step: usize,
        loss: f64,
        layer: Option<usize>,
        trace: Vec<f64>,
    },

    #[error("image error: {0}")]
    Image(String),

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

    /// Process exit code for this error: 1 for validation problems, 2 for
    /// failures that happen while doing the work.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::InvalidArgument(_)
            | Error::Unsupported(_)
            | Error::DimensionMismatch(_)
            | Error::Capacity(_)
            | Error::Parse(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
