//! Leverage-score edge sampling.
//!
//! Draws `r` edge indices i.i.d. from a categorical distribution `p`
//! (inverse CDF with binary search over a ChaCha8 stream), rescales each
//! draw by `1/√(r p_i)`, and assembles the sparsified Laplacian
//!
//! ```text
//! L̃ = Σ_t  w_{i_t} b_{i_t} b_{i_t}ᵀ / (r p_{i_t})  =  (Bᵀ W^{1/2} S)(Sᵀ W^{1/2} B)
//! ```
//!
//! without ever forming the m×r sampling matrix `S`. Repeated draws of an
//! edge are merged into one row with accumulated weight.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{IncidenceFactors, Laplacian};
use crate::spectral::PROBABILITY_SUM_TOL;

/// Upper limit on any sample count this module will produce.
pub const MAX_SAMPLES: usize = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("log argument {0} must exceed 1")]
    LogArgument(f64),
    #[error("sample count {0:.3e} exceeds the supported maximum")]
    TooLarge(f64),
    #[error("invalid probabilities: {0}")]
    Probabilities(String),
    #[error("expected {expected} probabilities, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("internal invariant violated: drew edge {index} with zero probability")]
    ZeroProbabilityDraw { index: usize },
}

fn check_unit_open(name: &str, x: f64) -> Result<(), SamplingError> {
    if x.is_finite() && x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(SamplingError::InvalidParameter(format!("{name} must lie in (0, 1), got {x}")))
    }
}

fn check_beta(beta: f64) -> Result<(), SamplingError> {
    if beta.is_finite() && beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(SamplingError::InvalidParameter(format!("beta must lie in (0, 1], got {beta}")))
    }
}

fn check_c0(c0: f64) -> Result<(), SamplingError> {
    if c0.is_finite() && c0 > 0.0 {
        Ok(())
    } else {
        Err(SamplingError::InvalidParameter(format!("c0 must be positive, got {c0}")))
    }
}

/// `⌈2 a ln a⌉` with `a > 1`.
fn two_a_log_a(a: f64) -> Result<usize, SamplingError> {
    if a.is_nan() || a <= 1.0 || !a.is_finite() {
        return Err(SamplingError::LogArgument(a));
    }
    let r = (2.0 * a * a.ln()).ceil();
    if r > MAX_SAMPLES as f64 {
        return Err(SamplingError::TooLarge(r));
    }
    Ok(r as usize)
}

/// `r = ⌈(72 c0² n / (β ε)) · ln(36 c0² n / (β ε))⌉`.
pub fn sample_count(n: usize, epsilon: f64, beta: f64, c0: f64) -> Result<usize, SamplingError> {
    check_unit_open("epsilon", epsilon)?;
    check_beta(beta)?;
    check_c0(c0)?;
    if n == 0 {
        return Err(SamplingError::InvalidParameter("n must be positive".into()));
    }
    two_a_log_a(36.0 * c0 * c0 * n as f64 / (beta * epsilon))
}

/// Column count for Exactly(c) with target `E‖AAᵀ − CCᵀ‖₂ ≤ ε`:
/// `c = ⌈2 (c0² ‖A‖_F² / (β ε²)) · ln(c0² ‖A‖_F² / (β ε²))⌉`.
pub fn exactly_c_sample_count(frob_sq: f64, epsilon: f64, beta: f64, c0: f64) -> Result<usize, SamplingError> {
    check_unit_open("epsilon", epsilon)?;
    check_beta(beta)?;
    check_c0(c0)?;
    two_a_log_a(c0 * c0 * frob_sq / (beta * epsilon * epsilon))
}

/// The side condition `c0² ‖A‖_F² ≥ 4 β ε²` of the Exactly(c) bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactlyCCondition {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn exactly_c_condition(frob_sq: f64, epsilon: f64, beta: f64, c0: f64) -> ExactlyCCondition {
    let lhs = c0 * c0 * frob_sq;
    let rhs = 4.0 * beta * epsilon * epsilon;
    ExactlyCCondition {
        lhs,
        rhs,
        holds: lhs >= rhs,
    }
}

/// Independent per-trial seed from a base seed (SplitMix64 finalizer).
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed
        .wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator behind every draw: ChaCha8 seeded via `seed_from_u64`.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_distribution(p: &[f64]) -> Result<(), SamplingError> {
    if p.is_empty() {
        return Err(SamplingError::Probabilities("empty distribution".into()));
    }
    if let Some((i, x)) = p.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
        return Err(SamplingError::Probabilities(format!("entry {i} is {x}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(SamplingError::Probabilities(format!("sum is {sum}")));
    }
    Ok(())
}

/// Inverse-CDF sampler over a fixed categorical distribution.
#[derive(Debug, Clone)]
pub struct CategoricalSampler {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl CategoricalSampler {
    pub fn new(p: &[f64]) -> Result<Self, SamplingError> {
        check_distribution(p)?;
        let mut acc = 0.0;
        let cdf = p
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        let last_positive = p.iter().rposition(|&x| x > 0.0).unwrap_or(0);
        Ok(CategoricalSampler { cdf, last_positive })
    }

    /// First index whose cumulative mass exceeds a uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let u = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.last_positive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleCountSource {
    /// `r` from [`sample_count`].
    Theorem,
    /// Caller-supplied `r`; outside the guarantee.
    Override,
}

/// Everything needed to draw one sparsifier.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub probabilities: Vec<f64>,
    pub beta: f64,
    pub epsilon: f64,
    pub c0: f64,
    pub r: usize,
    pub seed: u64,
    pub source: SampleCountSource,
}

impl SamplingPlan {
    /// Plan with `r` from [`sample_count`] for an `n`-vertex graph.
    pub fn new(
        probabilities: Vec<f64>,
        n: usize,
        epsilon: f64,
        beta: f64,
        c0: f64,
        seed: u64,
    ) -> Result<Self, SamplingError> {
        let r = sample_count(n, epsilon, beta, c0)?;
        check_distribution(&probabilities)?;
        Ok(SamplingPlan {
            probabilities,
            beta,
            epsilon,
            c0,
            r,
            seed,
            source: SampleCountSource::Theorem,
        })
    }

    /// Plan with an explicit sample count.
    pub fn with_sample_count(
        probabilities: Vec<f64>,
        r: usize,
        epsilon: f64,
        beta: f64,
        c0: f64,
        seed: u64,
    ) -> Result<Self, SamplingError> {
        check_unit_open("epsilon", epsilon)?;
        check_beta(beta)?;
        check_c0(c0)?;
        if r == 0 || r > MAX_SAMPLES {
            return Err(SamplingError::InvalidParameter(format!("r must lie in [1, {MAX_SAMPLES}], got {r}")));
        }
        check_distribution(&probabilities)?;
        Ok(SamplingPlan {
            probabilities,
            beta,
            epsilon,
            c0,
            r,
            seed,
            source: SampleCountSource::Override,
        })
    }

    pub fn reseeded(&self, seed: u64) -> Self {
        SamplingPlan {
            seed,
            ..self.clone()
        }
    }
}

/// `r` i.i.d. draws from `plan.probabilities`, reproducible from `plan.seed`.
pub fn draw_samples(plan: &SamplingPlan) -> Vec<usize> {
    let sampler = CategoricalSampler::new(&plan.probabilities)
        .expect("SamplingPlan constructors validate the distribution");
    let mut rng = rng_for(plan.seed);
    (0..plan.r).map(|_| sampler.sample(&mut rng)).collect()
}

fn tally(samples: &[usize]) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for &i in samples {
        *counts.entry(i).or_insert(0) += 1;
    }
    counts
}

/// Result of the Exactly(c) algorithm: `C = A S` with `S_{i_t t} = 1/√(c p_{i_t})`.
#[derive(Debug, Clone)]
pub struct ColumnSample {
    pub indices: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

/// Samples `c` columns of `a` i.i.d. from `p` and rescales each by `1/√(c p_i)`.
pub fn exactly_c(a: &DMatrix<f64>, p: &[f64], c: usize, seed: u64) -> Result<ColumnSample, SamplingError> {
    if p.len() != a.ncols() {
        return Err(SamplingError::LengthMismatch {
            expected: a.ncols(),
            found: p.len(),
        });
    }
    if c == 0 {
        return Err(SamplingError::InvalidParameter("c must be positive".into()));
    }
    let sampler = CategoricalSampler::new(p)?;
    let mut rng = rng_for(seed);
    let indices: Vec<usize> = (0..c).map(|_| sampler.sample(&mut rng)).collect();
    let mut matrix = DMatrix::zeros(a.nrows(), c);
    for (t, &i) in indices.iter().enumerate() {
        let s = 1.0 / (c as f64 * p[i]).sqrt();
        matrix.set_column(t, &(a.column(i) * s));
    }
    Ok(ColumnSample { indices, matrix })
}

/// `‖A Aᵀ − C Cᵀ‖₂`.
pub fn gram_deviation(a: &DMatrix<f64>, c: &DMatrix<f64>) -> f64 {
    let diff = a * a.transpose() - c * c.transpose();
    spectral_norm_symmetric(diff)
}

fn spectral_norm_symmetric(m: DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .fold(0.0, |acc, l| acc.max(l.abs()))
}

/// One sampled edge after merging repeated draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledEdge {
    pub index: usize,
    pub endpoints: (usize, usize),
    pub count: usize,
    /// `w_i · count_i / (r p_i)`.
    pub weight: f64,
}

/// The sparsified Laplacian together with the draws that produced it.
#[derive(Debug, Clone)]
pub struct SparsifiedSystem {
    n: usize,
    r: usize,
    samples: Vec<usize>,
    edges: Vec<SampledEdge>,
    laplacian: Laplacian,
}

impl SparsifiedSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Drawn indices `i_1 … i_r` in draw order.
    pub fn samples(&self) -> &[usize] {
        &self.samples
    }

    /// Distinct sampled edges, sorted by edge index.
    pub fn sampled_edges(&self) -> &[SampledEdge] {
        &self.edges
    }

    pub fn distinct_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn aggregated_weights(&self) -> BTreeMap<usize, f64> {
        self.edges.iter().map(|e| (e.index, e.weight)).collect()
    }

    pub fn laplacian(&self) -> &Laplacian {
        &self.laplacian
    }

    pub fn nnz(&self) -> usize {
        self.laplacian.nnz()
    }

    /// Dense `k×n` matrix with row `√weight · b_i` per distinct sampled edge;
    /// its Gram matrix is `L̃`.
    pub fn scaled_rows(&self) -> DMatrix<f64> {
        let mut rows = DMatrix::zeros(self.edges.len(), self.n);
        for (k, e) in self.edges.iter().enumerate() {
            let s = e.weight.sqrt();
            rows[(k, e.endpoints.0)] = s;
            rows[(k, e.endpoints.1)] = -s;
        }
        rows
    }

    /// Concentration of `U_Φᵀ S Sᵀ U_Φ` for the draws behind this system.
    pub fn concentration(&self, basis: &DMatrix<f64>, plan: &SamplingPlan) -> ConcentrationReport {
        concentration_from_counts(
            basis,
            self.edges.iter().map(|e| (e.index, e.count)),
            self.r,
            &plan.probabilities,
        )
    }
}

/// Builds `L̃` from the draws of `plan`.
pub fn build_sparsifier(f: &IncidenceFactors, plan: &SamplingPlan) -> Result<SparsifiedSystem, SamplingError> {
    if plan.probabilities.len() != f.m() {
        return Err(SamplingError::LengthMismatch {
            expected: f.m(),
            found: plan.probabilities.len(),
        });
    }
    let samples = draw_samples(plan);
    let r = plan.r as f64;
    let mut edges = Vec::new();
    for (index, count) in tally(&samples) {
        let p = plan.probabilities[index];
        if p <= 0.0 {
            return Err(SamplingError::ZeroProbabilityDraw { index });
        }
        edges.push(SampledEdge {
            index,
            endpoints: f.endpoints()[index],
            count,
            weight: f.weights()[index] * count as f64 / (r * p),
        });
    }
    let laplacian = Laplacian::from_weighted_pairs(
        f.n(),
        edges.iter().map(|e| (e.endpoints.0, e.endpoints.1, e.weight)),
    );
    Ok(SparsifiedSystem {
        n: f.n(),
        r: plan.r,
        samples,
        edges,
        laplacian,
    })
}

/// Spectral statistics of `Ω = Sᵀ U_Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    /// `‖U_Φᵀ S Sᵀ U_Φ − I_ρ‖₂`.
    pub deviation: f64,
    /// Smallest `σ_i²(Sᵀ U_Φ)`.
    pub min_sv_sq: f64,
    /// Largest `σ_i²(Sᵀ U_Φ)`.
    pub max_sv_sq: f64,
}

impl ConcentrationReport {
    /// `max_i |σ_i²(Sᵀ U_Φ) − 1|`.
    pub fn max_sv_deviation(&self) -> f64 {
        (self.min_sv_sq - 1.0).abs().max((self.max_sv_sq - 1.0).abs())
    }
}

fn concentration_from_counts(
    basis: &DMatrix<f64>,
    counts: impl Iterator<Item = (usize, usize)>,
    r: usize,
    p: &[f64],
) -> ConcentrationReport {
    let rho = basis.ncols();
    if rho == 0 {
        return ConcentrationReport {
            deviation: 0.0,
            min_sv_sq: 1.0,
            max_sv_sq: 1.0,
        };
    }
    let mut gram = DMatrix::<f64>::zeros(rho, rho);
    for (i, count) in counts {
        let scale = count as f64 / (r as f64 * p[i]);
        let row = basis.row(i);
        gram += row.transpose() * row * scale;
    }
    let eig = SymmetricEigen::new(gram);
    let min_sv_sq = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_sv_sq = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let deviation = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, l| acc.max((l - 1.0).abs()));
    ConcentrationReport {
        deviation,
        min_sv_sq,
        max_sv_sq,
    }
}

/// Draws `plan` and measures `‖U_Φᵀ S Sᵀ U_Φ − I_ρ‖₂` for `basis = U_Φ`.
pub fn concentration_check(basis: &DMatrix<f64>, plan: &SamplingPlan) -> Result<ConcentrationReport, SamplingError> {
    if plan.probabilities.len() != basis.nrows() {
        return Err(SamplingError::LengthMismatch {
            expected: basis.nrows(),
            found: plan.probabilities.len(),
        });
    }
    let counts = tally(&draw_samples(plan));
    Ok(concentration_from_counts(
        basis,
        counts.into_iter(),
        plan.r,
        &plan.probabilities,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{incidence_factors, laplacian_of, WeightedGraph};

    fn uniform(m: usize) -> Vec<f64> {
        vec![1.0 / m as f64; m]
    }

    #[test]
    fn sample_count_examples() {
        assert_eq!(sample_count(30, 0.5, 1.0, 1.0).unwrap(), 33169);
        assert_eq!(sample_count(2, 0.9, 1.0, 1.0).unwrap(), 702);
        assert!(sample_count(30, 0.5, 0.5, 1.0).unwrap() >= sample_count(30, 0.5, 1.0, 1.0).unwrap());
    }

    #[test]
    fn sample_count_rejects_bad_parameters() {
        assert!(matches!(sample_count(1, 0.5, 1.0, 0.01), Err(SamplingError::LogArgument(_))));
        assert!(sample_count(10, 0.0, 1.0, 1.0).is_err());
        assert!(sample_count(10, 1.0, 1.0, 1.0).is_err());
        assert!(sample_count(10, 0.5, 0.0, 1.0).is_err());
        assert!(sample_count(10, 0.5, 1.0, -1.0).is_err());
        assert!(matches!(sample_count(10, 1e-12, 1.0, 1.0), Err(SamplingError::TooLarge(_))));
    }

    #[test]
    fn degenerate_distribution() {
        let plan = SamplingPlan::with_sample_count(vec![1.0, 0.0, 0.0], 500, 0.5, 1.0, 1.0, 3).unwrap();
        assert!(draw_samples(&plan).iter().all(|&i| i == 0));
    }

    #[test]
    fn zero_probability_never_drawn() {
        let plan = SamplingPlan::with_sample_count(vec![0.0, 0.5, 0.0, 0.5, 0.0], 20_000, 0.5, 1.0, 1.0, 11).unwrap();
        assert!(draw_samples(&plan).iter().all(|&i| i == 1 || i == 3));
    }

    #[test]
    fn uniform_counts_within_band() {
        let plan = SamplingPlan::with_sample_count(uniform(3), 30_000, 0.5, 1.0, 1.0, 2024).unwrap();
        let counts = tally(&draw_samples(&plan));
        for i in 0..3 {
            let c = counts[&i];
            assert!((9600..=10400).contains(&c), "edge {i}: {c}");
        }
    }

    #[test]
    fn draws_are_deterministic() {
        let plan = SamplingPlan::with_sample_count(vec![0.2, 0.3, 0.5], 1000, 0.5, 1.0, 1.0, 99).unwrap();
        assert_eq!(draw_samples(&plan), draw_samples(&plan));
        assert_ne!(draw_samples(&plan), draw_samples(&plan.reseeded(100)));
    }

    #[test]
    fn rng_stream_is_pinned() {
        // ChaCha8 via seed_from_u64 is platform independent; frozen prefix.
        let plan = SamplingPlan::with_sample_count(vec![0.25; 4], 12, 0.5, 1.0, 1.0, 0).unwrap();
        assert_eq!(draw_samples(&plan), vec![2, 1, 2, 0, 3, 2, 3, 3, 3, 0, 3, 3]);
        assert_eq!(trial_seed(7, 3), 10753165928301472203);
    }

    #[test]
    fn plan_rejects_bad_distribution() {
        assert!(SamplingPlan::with_sample_count(vec![0.5, 0.4], 10, 0.5, 1.0, 1.0, 0).is_err());
        assert!(SamplingPlan::with_sample_count(vec![1.5, -0.5], 10, 0.5, 1.0, 1.0, 0).is_err());
        assert!(SamplingPlan::with_sample_count(vec![1.0], 0, 0.5, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn single_edge_sparsifier_is_exact() {
        let g = WeightedGraph::from_triples(2, [(0, 1, 2.5)]).unwrap();
        let f = incidence_factors(&g);
        let plan = SamplingPlan::with_sample_count(vec![1.0], 37, 0.5, 1.0, 1.0, 5).unwrap();
        let sys = build_sparsifier(&f, &plan).unwrap();
        let diff = sys.laplacian().to_dense() - laplacian_of(&g).to_dense();
        assert!(diff.amax() < 1e-14);
        assert_eq!(sys.distinct_edges(), 1);
        assert_eq!(sys.aggregated_weights()[&0], 2.5 * 37.0 / 37.0);
    }

    #[test]
    fn zero_probability_draw_is_an_invariant_violation() {
        let g = WeightedGraph::from_triples(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let f = incidence_factors(&g);
        let plan = SamplingPlan::with_sample_count(vec![1.0, 0.0], 10, 0.5, 1.0, 1.0, 0).unwrap();
        // all draws land on edge 0, so the build succeeds and edge 1 is absent
        let sys = build_sparsifier(&f, &plan).unwrap();
        assert_eq!(sys.distinct_edges(), 1);
        let bad = SamplingPlan::with_sample_count(vec![1.0, 0.0, 0.0], 10, 0.5, 1.0, 1.0, 0).unwrap();
        assert!(matches!(build_sparsifier(&f, &bad), Err(SamplingError::LengthMismatch { .. })));
    }

    #[test]
    fn one_edge_concentration_is_zero() {
        let basis = DMatrix::from_element(1, 1, 1.0);
        let plan = SamplingPlan::with_sample_count(vec![1.0], 17, 0.5, 1.0, 1.0, 1).unwrap();
        let rep = concentration_check(&basis, &plan).unwrap();
        assert!(rep.deviation.abs() < 1e-15);
    }

    #[test]
    fn exactly_c_columns_are_rescaled() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let p = [0.2, 0.3, 0.5];
        let cs = exactly_c(&a, &p, 8, 42).unwrap();
        assert_eq!(cs.matrix.ncols(), 8);
        for (t, &i) in cs.indices.iter().enumerate() {
            let s = 1.0 / (8.0 * p[i]).sqrt();
            assert!((cs.matrix[(0, t)] - a[(0, i)] * s).abs() < 1e-15);
            assert!((cs.matrix[(1, t)] - a[(1, i)] * s).abs() < 1e-15);
        }
    }

    #[test]
    fn exactly_c_count_and_condition() {
        // c0²‖A‖_F²/(βε²) = 4/0.25 = 16 → 2·16·ln16 = 88.72 → 89
        assert_eq!(exactly_c_sample_count(4.0, 0.5, 1.0, 1.0).unwrap(), 89);
        let cond = exactly_c_condition(2.0, 0.5, 1.0, 1.0);
        assert!(cond.holds);
        assert_eq!(cond.rhs, 1.0);
        assert!(!exactly_c_condition(0.1, 0.9, 1.0, 1.0).holds);
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|t| trial_seed(7, t)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(trial_seed(7, 3), trial_seed(7, 3));
    }
}
