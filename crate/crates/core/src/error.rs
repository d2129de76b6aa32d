use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("oscillator {index} is degenerate: radius {radius:e} is below {epsilon:e} with incoming couplings")]
    DegenerateState {
        index: usize,
        radius: f64,
        epsilon: f64,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("decoder solve failed for population `{population}`: {detail}")]
    DecoderSolve { population: String, detail: String },

    #[error("{module} diverged at t = {time:.3} s: {detail}")]
    Divergence {
        module: String,
        time: f64,
        detail: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn divergence(module: impl Into<String>, time: f64, detail: impl Into<String>) -> Self {
        Error::Divergence {
            module: module.into(),
            time,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Topology(_) | Error::Shape(_) => 2,
            Error::Divergence { .. } | Error::DegenerateState { .. } => 3,
            Error::DecoderSolve { .. } => 3,
            Error::Io { .. } | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}
