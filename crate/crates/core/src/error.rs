use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a domain invariant (counts, probabilities, shapes).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("fit did not converge after {iterations} iterations (gradient max-norm {grad_norm:.3e})")]
    NotConverged { iterations: usize, grad_norm: f64 },

    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 validation, 3 non-convergence, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotConverged { .. } | Error::Diverged { .. } => 3,
            Error::Io { .. } => 4,
            _ => 2,
        }
    }
}
