use std::io;

use thiserror::Error;

/// Errors surfaced by solvers, generators, the simulator and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("iteration did not converge within {iterations} sweeps (last change {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("policy is improper: goal unreachable from state {state}")]
    ImproperPolicy { state: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("episode {episode} exceeded the step cap of {cap} steps")]
    StepCapExceeded { episode: usize, cap: u64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed ledger: {0}")]
    Ledger(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
