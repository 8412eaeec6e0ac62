#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use resist_core::generators;
use resist_core::sampler::rng_for;
use resist_core::WeightedGraph;

/// Pseudoinverse from the eigendecomposition of a dense symmetric matrix,
/// dropping eigenvalues below `1e-9 · λ_max`.
pub fn eig_pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let lmax = eig.eigenvalues.amax();
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = eig.eigenvalues[k];
        if lambda.abs() > 1e-9 * lmax {
            let v = eig.eigenvectors.column(k);
            out += v * v.transpose() / lambda;
        }
    }
    out
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// `count` random connected graphs with `n ∈ [lo_n, hi_n]`, weights in [0.1, 10).
pub fn random_connected_family(seed: u64, count: usize, lo_n: usize, hi_n: usize) -> Vec<WeightedGraph> {
    use rand::Rng;
    let mut rng = rng_for(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(lo_n..=hi_n);
            let extra = rng.random_range(0.05..0.6);
            generators::random_connected(n, extra, 0.1, 10.0, &mut rng)
        })
        .collect()
}

pub fn triangle() -> WeightedGraph {
    WeightedGraph::from_triples(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
}

use resist_core::{
    build_sparsifier, error_report, laplacian_of, leverage_probabilities, profile_graph, solve_exact,
    solve_sparsified, IncidenceFactors, SamplingPlan, SolveReport, SpectralProfile,
};

pub struct Instance {
    pub graph: WeightedGraph,
    pub factors: IncidenceFactors,
    pub profile: SpectralProfile,
    pub probabilities: Vec<f64>,
}

impl Instance {
    pub fn new(graph: WeightedGraph) -> Self {
        let (factors, profile) = profile_graph(&graph).unwrap();
        let probabilities = leverage_probabilities(&profile, 1.0).unwrap();
        Instance {
            graph,
            factors,
            profile,
            probabilities,
        }
    }

    pub fn theorem_plan(&self, epsilon: f64, seed: u64) -> SamplingPlan {
        SamplingPlan::new(self.probabilities.clone(), self.graph.n(), epsilon, 1.0, 1.0, seed).unwrap()
    }

    pub fn fixed_plan(&self, r: usize, epsilon: f64, seed: u64) -> SamplingPlan {
        SamplingPlan::with_sample_count(self.probabilities.clone(), r, epsilon, 1.0, 1.0, seed).unwrap()
    }

    pub fn exact(&self, b: &[f64]) -> SolveReport {
        solve_exact(&laplacian_of(&self.graph), &self.profile, b).unwrap()
    }

    /// One pipeline run: sparsify with `plan`, solve, compare.
    pub fn trial(&self, plan: &SamplingPlan, b: &[f64], exact: &SolveReport) -> SolveReport {
        let sys = build_sparsifier(&self.factors, plan).unwrap();
        let approx = solve_sparsified(&sys, b).unwrap();
        error_report(exact, &approx, &self.factors, plan.epsilon).unwrap()
    }
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
