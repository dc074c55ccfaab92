use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the optimization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error in {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("LP solver error: {message} (basis: {basis:?})")]
    Solver { message: String, basis: Vec<usize> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("optimization failed: {0}")]
    Optimization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
