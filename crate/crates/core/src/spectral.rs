//! Leverage scores, effective resistances and the orthogonal factor of
//! `Φ = W^{1/2} B`.
//!
//! Two independent routes are provided:
//!
//! * [`spectral_profile`] takes a thin SVD of `Φ` and reads leverage scores
//!   off the squared row norms of `U_Φ`.
//! * [`effective_resistances`] forms the dense pseudoinverse of `L` from
//!   its symmetric eigendecomposition and evaluates `diag(B L† Bᵀ)`.
//!
//! For every edge `ℓ_i = w_i · R_i`; the test suites hold the two routes to
//! that identity.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::graph::{incidence_factors, laplacian_of, IncidenceFactors, WeightedGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("graph has no edges")]
    NoEdges,
    #[error("factorization failed to converge (condition estimate {condition_estimate:.3e})")]
    Factorization { condition_estimate: f64 },
    #[error("factorization produced non-finite values (condition estimate {condition_estimate:.3e})")]
    NonFinite { condition_estimate: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbabilityError {
    #[error("beta must lie in (0, 1], got {0}")]
    InvalidBeta(f64),
    #[error("total leverage is zero")]
    Degenerate,
    #[error("expected {expected} probabilities, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("probability {index} is negative or non-finite: {value}")]
    Invalid { index: usize, value: f64 },
    #[error("probability {index} = {value} is below the leverage bound {bound}")]
    BelowBound { index: usize, value: f64, bound: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    BadSum { sum: f64 },
}

/// Tolerance on `Σ p_i = 1`.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// Singular values at or below this are treated as zero:
/// `max(rows, cols) · σ_max · ε_machine`.
pub fn singular_value_cutoff(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * sigma_max * f64::EPSILON
}

/// Ratio of the extreme weighted degrees, reported when a factorization fails.
fn degree_condition_estimate(f: &IncidenceFactors) -> f64 {
    let mut deg = vec![0.0f64; f.n()];
    for (&(a, b), &w) in f.endpoints().iter().zip(f.weights()) {
        deg[a] += w;
        deg[b] += w;
    }
    let max = deg.iter().cloned().fold(0.0, f64::max);
    let min = deg.iter().cloned().filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    if min.is_finite() && min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn normal_pseudoinverse_apply(right: &DMatrix<f64>, singular_values: &[f64], b: &[f64]) -> Vec<f64> {
    let b = DVector::from_column_slice(b);
    let mut coeffs = right.tr_mul(&b);
    for (c, s) in coeffs.iter_mut().zip(singular_values) {
        *c /= s * s;
    }
    (right * coeffs).as_slice().to_vec()
}

/// Thin right factorization `A = U Σ Vᵀ` of a row matrix, truncated at the
/// detected rank.
#[derive(Debug, Clone)]
pub struct RowFactorization {
    pub left: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub right: DMatrix<f64>,
}

impl RowFactorization {
    /// Thin SVD (faer) truncated at [`singular_value_cutoff`]; `None` if the
    /// factorization fails or produces non-finite output.
    pub fn new(a: DMatrix<f64>) -> Option<Self> {
        let (rows, cols) = a.shape();
        if rows == 0 || cols == 0 {
            return Some(RowFactorization {
                left: DMatrix::zeros(rows, 0),
                singular_values: Vec::new(),
                right: DMatrix::zeros(cols, 0),
            });
        }
        let svd = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)]).thin_svd().ok()?;
        let k = rows.min(cols);
        let (u, s, v) = (svd.U(), svd.S(), svd.V());
        let mut sv: Vec<f64> = (0..k).map(|i| s[i]).collect();
        if sv.iter().any(|s| !s.is_finite()) || sv.windows(2).any(|w| w[0] < w[1]) {
            return None;
        }
        let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
        let cutoff = singular_value_cutoff(rows, cols, sigma_max);
        let rank = sv.iter().filter(|&&s| s > cutoff).count();
        let left = DMatrix::from_fn(rows, rank, |i, j| u[(i, j)]);
        let right = DMatrix::from_fn(cols, rank, |i, j| v[(i, j)]);
        if left.iter().chain(right.iter()).any(|x| !x.is_finite()) {
            return None;
        }
        sv.truncate(rank);
        Some(RowFactorization {
            left,
            singular_values: sv,
            right,
        })
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `V Σ⁻² Vᵀ b`, i.e. `(AᵀA)† b`.
    pub fn normal_pseudoinverse_apply(&self, b: &[f64]) -> Vec<f64> {
        normal_pseudoinverse_apply(&self.right, &self.singular_values, b)
    }
}

/// Exact (β = 1) spectral data of `Φ = W^{1/2} B`.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    /// `ℓ_i = ‖(U_Φ)_(i)‖²`.
    pub leverage: Vec<f64>,
    /// `R_i = ℓ_i / w_i`.
    pub resistance: Vec<f64>,
    pub rank: usize,
    /// `U_Φ`, m×ρ with orthonormal columns.
    pub basis: DMatrix<f64>,
    /// `Σ_Φ`, descending.
    pub singular_values: Vec<f64>,
    /// `V_Φ`, n×ρ.
    pub right_factor: DMatrix<f64>,
}

impl SpectralProfile {
    pub fn total_leverage(&self) -> f64 {
        self.leverage.iter().sum()
    }

    pub fn max_leverage(&self) -> f64 {
        self.leverage.iter().cloned().fold(0.0, f64::max)
    }

    /// `L† b = V_Φ Σ_Φ⁻² V_Φᵀ b`.
    pub fn pseudoinverse_apply(&self, b: &[f64]) -> Vec<f64> {
        normal_pseudoinverse_apply(&self.right_factor, &self.singular_values, b)
    }
}

pub fn spectral_profile(f: &IncidenceFactors) -> Result<SpectralProfile, SpectralError> {
    if f.m() == 0 {
        return Err(SpectralError::NoEdges);
    }
    let fact = RowFactorization::new(f.phi_dense()).ok_or_else(|| SpectralError::Factorization {
        condition_estimate: degree_condition_estimate(f),
    })?;
    let leverage: Vec<f64> = fact
        .left
        .row_iter()
        .map(|row| row.iter().map(|x| x * x).sum())
        .collect();
    if leverage.iter().any(|l| !l.is_finite()) {
        return Err(SpectralError::NonFinite {
            condition_estimate: degree_condition_estimate(f),
        });
    }
    let resistance = leverage
        .iter()
        .zip(f.weights())
        .map(|(l, w)| l / w)
        .collect();
    Ok(SpectralProfile {
        leverage,
        resistance,
        rank: fact.rank(),
        basis: fact.left,
        singular_values: fact.singular_values,
        right_factor: fact.right,
    })
}

/// Convenience: incidence factors plus spectral profile of a graph.
pub fn profile_graph(g: &WeightedGraph) -> Result<(IncidenceFactors, SpectralProfile), SpectralError> {
    let f = incidence_factors(g);
    let p = spectral_profile(&f)?;
    Ok((f, p))
}

/// Moore–Penrose pseudoinverse of a symmetric matrix via its
/// eigendecomposition; eigenvalues with `|λ| ≤ n · |λ|_max · ε` are dropped.
pub fn symmetric_pseudoinverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cutoff = n as f64 * lmax * f64::EPSILON;
    let mut out = DMatrix::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > cutoff {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lambda;
        }
    }
    out
}

/// `diag(B L† Bᵀ)` from the dense pseudoinverse of `L`.
pub fn effective_resistances(g: &WeightedGraph) -> Vec<f64> {
    let pinv = symmetric_pseudoinverse(&laplacian_of(g).to_dense());
    g.edges()
        .iter()
        .map(|e| pinv[(e.u, e.u)] + pinv[(e.v, e.v)] - 2.0 * pinv[(e.u, e.v)])
        .collect()
}

/// `max_i |ℓ_i − w_i R_i| / max(ℓ_i, 1e−12)`.
pub fn lemma_relative_error(leverage: &[f64], weights: &[f64], resistance: &[f64]) -> f64 {
    leverage
        .iter()
        .zip(weights)
        .zip(resistance)
        .map(|((l, w), r)| (l - w * r).abs() / l.max(1e-12))
        .fold(0.0, f64::max)
}

fn check_beta(beta: f64) -> Result<(), ProbabilityError> {
    if beta.is_finite() && beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(ProbabilityError::InvalidBeta(beta))
    }
}

/// `p_i = ℓ_i / Σ_j ℓ_j`. These satisfy the leverage bound for every β.
pub fn leverage_probabilities(profile: &SpectralProfile, beta: f64) -> Result<Vec<f64>, ProbabilityError> {
    check_beta(beta)?;
    let total = profile.total_leverage();
    if total <= 0.0 || !total.is_finite() {
        return Err(ProbabilityError::Degenerate);
    }
    let p: Vec<f64> = profile.leverage.iter().map(|l| l / total).collect();
    validate_probabilities(profile, beta, p)
}

/// Exact probabilities passed through `perturb`, then validated.
pub fn leverage_probabilities_with<F>(
    profile: &SpectralProfile,
    beta: f64,
    perturb: F,
) -> Result<Vec<f64>, ProbabilityError>
where
    F: FnOnce(&[f64]) -> Vec<f64>,
{
    let exact = leverage_probabilities(profile, beta)?;
    validate_probabilities(profile, beta, perturb(&exact))
}

/// Checks `Σ p_i = 1` and `p_i ≥ β ℓ_i / ‖U_Φ‖_F²` for every edge.
pub fn validate_probabilities(
    profile: &SpectralProfile,
    beta: f64,
    p: Vec<f64>,
) -> Result<Vec<f64>, ProbabilityError> {
    check_beta(beta)?;
    if p.len() != profile.leverage.len() {
        return Err(ProbabilityError::LengthMismatch {
            expected: profile.leverage.len(),
            found: p.len(),
        });
    }
    let frob_sq = profile.total_leverage();
    if frob_sq <= 0.0 || !frob_sq.is_finite() {
        return Err(ProbabilityError::Degenerate);
    }
    for (index, (&value, &l)) in p.iter().zip(&profile.leverage).enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(ProbabilityError::Invalid { index, value });
        }
        let bound = beta * l / frob_sq;
        // relative slack for the rounding in `beta * l / frob_sq`
        if value < bound * (1.0 - 1e-12) {
            return Err(ProbabilityError::BelowBound { index, value, bound });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(ProbabilityError::BadSum { sum });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> WeightedGraph {
        WeightedGraph::from_triples(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_edge_profile() {
        let g = WeightedGraph::from_triples(2, [(0, 1, 1.0)]).unwrap();
        let (_, p) = profile_graph(&g).unwrap();
        assert_eq!(p.rank, 1);
        assert!(close(p.leverage[0], 1.0, 1e-14));
        assert!(close(p.resistance[0], 1.0, 1e-14));
    }

    #[test]
    fn triangle_profile() {
        let (_, p) = profile_graph(&triangle()).unwrap();
        assert_eq!(p.rank, 2);
        for (l, r) in p.leverage.iter().zip(&p.resistance) {
            assert!(close(*l, 2.0 / 3.0, 1e-12));
            assert!(close(*r, 2.0 / 3.0, 1e-12));
        }
        let gram = p.basis.tr_mul(&p.basis);
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-12);
        assert!(p.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn resistance_examples() {
        let g = WeightedGraph::from_triples(2, [(0, 1, 1.0)]).unwrap();
        assert!(close(effective_resistances(&g)[0], 1.0, 1e-14));

        let g = WeightedGraph::from_triples(3, [(0, 1, 2.0), (1, 2, 3.0)]).unwrap();
        let r = effective_resistances(&g);
        assert!(close(r[0], 0.5, 1e-13));
        assert!(close(r[1], 1.0 / 3.0, 1e-13));

        for r in effective_resistances(&triangle()) {
            assert!(close(r, 2.0 / 3.0, 1e-13));
        }
    }

    #[test]
    fn disconnected_rank() {
        let g = WeightedGraph::from_triples(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let (_, p) = profile_graph(&g).unwrap();
        assert_eq!(p.rank, 2);
        assert!(close(p.total_leverage(), 2.0, 1e-12));
    }

    #[test]
    fn probabilities_exact() {
        let (_, p) = profile_graph(&triangle()).unwrap();
        let probs = leverage_probabilities(&p, 1.0).unwrap();
        for x in probs {
            assert!(close(x, 1.0 / 3.0, 1e-15));
        }

        let tree = WeightedGraph::from_triples(5, [(0, 1, 1.0), (1, 2, 2.0), (1, 3, 0.5), (3, 4, 7.0)]).unwrap();
        let (_, p) = profile_graph(&tree).unwrap();
        for x in leverage_probabilities(&p, 1.0).unwrap() {
            assert!(close(x, 0.25, 1e-14));
        }
    }

    #[test]
    fn perturbed_probabilities_checked() {
        let (_, p) = profile_graph(&triangle()).unwrap();
        let ok = leverage_probabilities_with(&p, 0.6, |_| vec![0.5, 0.3, 0.2]).unwrap();
        assert_eq!(ok, vec![0.5, 0.3, 0.2]);

        let err = leverage_probabilities_with(&p, 0.7, |_| vec![0.5, 0.3, 0.2]).unwrap_err();
        assert!(matches!(err, ProbabilityError::BelowBound { index: 2, .. }));

        let err = validate_probabilities(&p, 0.5, vec![0.5, 0.3, 0.3]).unwrap_err();
        assert!(matches!(err, ProbabilityError::BadSum { .. }));

        let err = validate_probabilities(&p, 0.5, vec![0.5, 0.5]).unwrap_err();
        assert!(matches!(err, ProbabilityError::LengthMismatch { expected: 3, found: 2 }));

        assert!(matches!(
            leverage_probabilities(&p, 0.0),
            Err(ProbabilityError::InvalidBeta(_))
        ));
        assert!(matches!(
            leverage_probabilities(&p, 1.5),
            Err(ProbabilityError::InvalidBeta(_))
        ));
    }

    #[test]
    fn empty_graph_has_no_profile() {
        let g = WeightedGraph::from_triples(3, []).unwrap();
        assert_eq!(profile_graph(&g).unwrap_err(), SpectralError::NoEdges);
    }
}
