use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("series is empty")]
    EmptySeries,

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("series has {len} samples, at least {min} required")]
    SeriesTooShort { len: usize, min: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index pair ({i}, {j}) invalid for a series of {n} samples")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("graph sizes differ: {left} vs {right} nodes")]
    SizeMismatch { left: usize, right: usize },

    #[error("tail fit needs at least {needed} bins with count >= {min_count}, found {found}")]
    InsufficientBins {
        found: usize,
        needed: usize,
        min_count: u64,
    },

    #[error("clustering value {c} is not attained by any admissible degree at rho = {rho}")]
    Unattainable { rho: usize, c: f64 },

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("adjacency matrix export refused for n = {n} (limit {limit})")]
    MatrixTooLarge { n: usize, limit: usize },

    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("orbit diverged at step {step} (|x| = {magnitude:e})")]
    Diverged { step: usize, magnitude: f64 },

    #[error("degenerate orbit: {0}")]
    DegenerateOrbit(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input or parameters: the caller can fix it.
    Validation,
    /// A numeric or I/O failure while running.
    Runtime,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. }
            | Error::NonFinite { .. }
            | Error::Diverged { .. }
            | Error::InsufficientBins { .. } => ErrorKind::Runtime,
            _ => ErrorKind::Validation,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::param(msg)
}
