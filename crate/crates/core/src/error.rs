//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// SNR-based noise requested for a window with zero energy.
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("windows are not contiguous: first ends at index {expected_start} - 1, second starts at {actual_start}")]
    Contiguity { expected_start: u64, actual_start: u64 },

    #[error("cardinality mismatch: {truth} true frequencies vs {estimate} estimates")]
    Cardinality { truth: usize, estimate: usize },

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    /// The estimator could not separate the requested number of components.
    #[error("under-resolution: requested {requested} frequencies, resolved {resolved}")]
    UnderResolution { requested: usize, resolved: usize },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("non-finite value produced at layer {layer}")]
    NonFinite { layer: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
