//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by image I/O, the projection operators and the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    UnsupportedImage { path: PathBuf, message: String },

    #[error("{path}: malformed PFM file: {message}")]
    MalformedPfm { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Png {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    /// Conjugate-gradient solve of the reversibility system stopped making
    /// progress before reaching the requested tolerance.
    #[error("conjugate gradient diverged: residual grew for {grew_iters} consecutive iterations (relative residual {residual:.3e})")]
    CgDiverged { residual: f64, grew_iters: usize },

    #[error("log-log slope regression needs at least 8 usable rings, found {0}")]
    InsufficientRings(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
