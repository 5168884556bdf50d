use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Solver(#[from] embedded_contact::Error),

    #[error("not converged: {0}")]
    NotConverged(String),
}

impl BenchError {
    /// Process exit code: 2 non-convergence, 3 configuration, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        use embedded_contact::Error as E;
        match self {
            BenchError::Config(_) => 3,
            BenchError::Io { .. } => 4,
            BenchError::NotConverged(_) => 2,
            BenchError::Solver(E::InvalidConfig(_) | E::UnsupportedTopology { .. }) => 3,
            BenchError::Solver(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
