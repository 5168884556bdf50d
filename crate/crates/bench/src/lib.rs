//! Benchmark driver for embedded frictional contact: problem registry,
//! runs, interface profiles, metrics and parameter studies.

pub mod config;
mod error;
pub mod metrics;
pub mod problems;
pub mod profile;
pub mod run;
pub mod studies;

pub use config::{Method, ProblemConfig, ProblemId};
pub use error::{BenchError, Result};
