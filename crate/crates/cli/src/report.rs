//! JSON report types. Every report has the top-level shape
//! `{mode, config, results, version}`; wall-clock timings live under a
//! `timings` key inside `results` and are the only non-deterministic part.

use serde::Serialize;
use serde_json::Value;

use resist_core::sampler::{ConcentrationReport, ExactlyCCondition, SampleCountSource};
use resist_core::SolveReport;

use crate::config::{Mode, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub mode: Mode,
    pub config: RunConfig,
    pub results: Results,
    pub version: &'static str,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("report serialization cannot fail")
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Results {
    Leverage(LeverageResults),
    Resistance(ResistanceResults),
    Sparsify(SparsifyResults),
    Solve(SolveResults),
    Verify(VerifyReport),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeverageResults {
    pub n: usize,
    pub m: usize,
    pub rank: usize,
    pub leverage: Vec<f64>,
    pub resistance: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub total_leverage: f64,
    pub max_leverage: f64,
    pub beta: f64,
    pub timings: Timings,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResistanceResults {
    pub n: usize,
    pub m: usize,
    pub rank: usize,
    /// `diag(B L† Bᵀ)` from the dense pseudoinverse.
    pub resistance: Vec<f64>,
    /// `ℓ_i / w_i` from the SVD of `Φ`.
    pub resistance_from_leverage: Vec<f64>,
    pub lemma_max_relerr: f64,
    pub timings: Timings,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationSummary {
    pub deviation: f64,
    pub min_sv_sq: f64,
    pub max_sv_sq: f64,
    pub max_sv_deviation: f64,
    /// `√ε / 2`.
    pub bound: f64,
    pub within_bound: bool,
}

impl ConcentrationSummary {
    pub fn new(rep: ConcentrationReport, epsilon: f64) -> Self {
        let bound = epsilon.sqrt() / 2.0;
        ConcentrationSummary {
            deviation: rep.deviation,
            min_sv_sq: rep.min_sv_sq,
            max_sv_sq: rep.max_sv_sq,
            max_sv_deviation: rep.max_sv_deviation(),
            bound,
            within_bound: rep.max_sv_deviation() <= bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SampledEdgeRecord {
    pub index: usize,
    pub count: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SparsifyResults {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub r_source: SampleCountSource,
    pub distinct_edges: usize,
    pub nnz: usize,
    pub nnz_bound: usize,
    pub rank: usize,
    pub sparsifier_rank: usize,
    pub concentration: ConcentrationSummary,
    pub sampled_edges: Vec<SampledEdgeRecord>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveTimings {
    pub total_ms: f64,
    pub spectral_ms: f64,
    pub sparsify_ms: f64,
    pub solve_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResults {
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub r: usize,
    pub r_source: SampleCountSource,
    pub distinct_edges: usize,
    pub nnz: usize,
    pub rank: usize,
    pub sparsifier_rank: usize,
    pub b: Vec<f64>,
    pub exact: SolveReport,
    pub sparsified: SolveReport,
    pub relative_energy_error: Option<f64>,
    pub success: bool,
    pub concentration: ConcentrationSummary,
    pub timings: SolveTimings,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Quantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl Quantiles {
    /// Linear-interpolation quantiles; `xs` must be non-empty.
    pub fn of(xs: &[f64]) -> Self {
        let mut v = xs.to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Quantiles {
            min: v[0],
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            max: v[v.len() - 1],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub relative_energy_error: Option<f64>,
    pub energy_error: f64,
    pub success: bool,
    pub concentration_deviation: f64,
    pub min_sv_sq: f64,
    pub max_sv_sq: f64,
    pub max_sv_deviation: f64,
    pub sparsifier_rank: usize,
    pub distinct_edges: usize,
    pub nnz: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub m: usize,
    pub rank: usize,
    pub trials: usize,
    pub success_count: usize,
    pub success_rate: f64,
    /// The guaranteed success probability, 2/3.
    pub probability_bound: f64,
    pub meets_probability_bound: bool,
    pub epsilon: f64,
    pub beta: f64,
    pub c0: f64,
    pub r: usize,
    pub r_source: SampleCountSource,
    pub max_leverage: f64,
    pub median_relative_energy_error: Option<f64>,
    pub mean_concentration_deviation: f64,
    pub concentration_standard_error: f64,
    /// `√ε / 6`.
    pub expected_deviation_bound: f64,
    pub mean_deviation_within_bound: bool,
    /// `√ε / 2`.
    pub concentration_bound: f64,
    pub concentration_success_count: usize,
    pub concentration_success_rate: f64,
    pub max_sv_deviation_quantiles: Quantiles,
    pub full_rank_trials: usize,
    pub lemma_max_relerr: f64,
    pub exactly_c_condition: ExactlyCCondition,
    pub per_trial: Vec<TrialRecord>,
    pub timings: Timings,
}

/// Removes every `timings` entry, leaving the deterministic part of a report.
pub fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("timings");
            map.values_mut().for_each(strip_timings);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timings),
        _ => {}
    }
}
