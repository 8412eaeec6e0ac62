use std::io;

use resist_core::{GraphError, ProbabilityError, SamplingError, SolveError, SpectralError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Input { path: String, source: GraphError },
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("sampling error: {0}")]
    Sampling(#[from] SamplingError),
    #[error("spectral error: {0}")]
    Spectral(#[from] SpectralError),
    #[error("probability error: {0}")]
    Probability(#[from] ProbabilityError),
    #[error("solve error: {0}")]
    Solve(#[from] SolveError),
}

impl HarnessError {
    /// 1 for usage, I/O and parse problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Input { .. } | HarnessError::Graph(_) | HarnessError::Io(_) => 1,
            HarnessError::Sampling(e) => match e {
                SamplingError::ZeroProbabilityDraw { .. } => 2,
                _ => 1,
            },
            HarnessError::Spectral(_) | HarnessError::Probability(_) | HarnessError::Solve(_) => 2,
        }
    }
}
