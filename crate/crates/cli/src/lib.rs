//! Command-line harness around `resist-core`: loads a graph, runs one of
//! the leverage / resistance / sparsify / solve / verify modes and emits a
//! JSON report.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{cmd_leverage, cmd_resistance, cmd_solve, cmd_sparsify, cmd_verify, default_rhs, run, run_with, Problem};
pub use config::{Mode, RunConfig, DEFAULT_EPSILON, DEFAULT_TRIALS};
pub use error::HarnessError;
pub use report::{strip_timings, Report, Results, VerifyReport};
