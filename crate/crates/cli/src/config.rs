use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Per-edge leverage scores, resistances and sampling probabilities.
    Leverage,
    /// Effective resistances via the dense pseudoinverse, with the leverage cross-check.
    Resistance,
    /// Draw one sparsifier and summarize it.
    Sparsify,
    /// Sparsify, then solve both systems and compare.
    Solve,
    /// Repeat the solve pipeline over seeded trials.
    Verify,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Leverage => "leverage",
            Mode::Resistance => "resistance",
            Mode::Sparsify => "sparsify",
            Mode::Solve => "solve",
            Mode::Verify => "verify",
        }
    }
}

pub const DEFAULT_EPSILON: f64 = 0.5;
pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub graph_path: Option<PathBuf>,
    /// Right-hand side file; absent means a seeded zero-sum normal vector.
    pub b_path: Option<PathBuf>,
    pub epsilon: f64,
    pub beta: f64,
    pub c0: f64,
    pub seed: u64,
    pub trials: usize,
    pub r_override: Option<usize>,
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        RunConfig {
            mode,
            graph_path: None,
            b_path: None,
            epsilon: DEFAULT_EPSILON,
            beta: 1.0,
            c0: 1.0,
            seed: 0,
            trials: DEFAULT_TRIALS,
            r_override: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(HarnessError::Config(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(HarnessError::Config(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(HarnessError::Config(format!("c0 must be positive, got {}", self.c0)));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.r_override == Some(0) {
            return Err(HarnessError::Config("r-override must be at least 1".into()));
        }
        Ok(())
    }
}
