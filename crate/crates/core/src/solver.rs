//! Minimal-norm least-squares solves `x = L† b` for the exact and the
//! sparsified Laplacian, and the energy-norm error between them.
//!
//! The energy norm follows the convention `‖x‖_L = xᵀ L x` (no square root).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{IncidenceFactors, Laplacian};
use crate::sampler::SparsifiedSystem;
use crate::spectral::{RowFactorization, SpectralProfile};

/// Below this energy the exact solution is treated as zero.
pub const ZERO_ENERGY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("factorization of the sparsified system failed")]
    Factorization,
}

fn check_dim(expected: usize, found: usize) -> Result<(), SolveError> {
    if expected == found {
        Ok(())
    } else {
        Err(SolveError::Dimension { expected, found })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub x: Vec<f64>,
    /// `‖L x − b‖₂` against the matrix that was solved.
    pub residual_two_norm: f64,
    /// `|1ᵀ x|`.
    pub null_component: f64,
    /// Rank of the matrix that was solved.
    pub rank: usize,
    /// `‖x_opt − x̃_opt‖_L`.
    pub energy_error: Option<f64>,
    /// `energy_error / ‖x_opt‖_L`; `None` when `‖x_opt‖_L = 0`.
    pub relative_energy_error: Option<f64>,
    pub success: Option<bool>,
}

fn two_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn report(l: &Laplacian, x: Vec<f64>, b: &[f64], rank: usize) -> SolveReport {
    let lx = l.mul_vec(&x);
    let resid: Vec<f64> = lx.iter().zip(b).map(|(a, c)| a - c).collect();
    SolveReport {
        residual_two_norm: two_norm(&resid),
        null_component: x.iter().sum::<f64>().abs(),
        rank,
        energy_error: None,
        relative_energy_error: None,
        success: None,
        x,
    }
}

/// `x_opt = V_Φ Σ_Φ⁻² V_Φᵀ b`. `profile` must belong to `laplacian`.
pub fn solve_exact(laplacian: &Laplacian, profile: &SpectralProfile, b: &[f64]) -> Result<SolveReport, SolveError> {
    check_dim(laplacian.n(), b.len())?;
    check_dim(laplacian.n(), profile.right_factor.nrows())?;
    let x = profile.pseudoinverse_apply(b);
    Ok(report(laplacian, x, b, profile.rank))
}

/// `x̃_opt = L̃† b`, from an SVD of the merged sampled rows `√w̃_i b_i`
/// truncated at `L̃`'s own rank.
pub fn solve_sparsified(sys: &SparsifiedSystem, b: &[f64]) -> Result<SolveReport, SolveError> {
    check_dim(sys.n(), b.len())?;
    let fact = RowFactorization::new(sys.scaled_rows()).ok_or(SolveError::Factorization)?;
    let x = fact.normal_pseudoinverse_apply(b);
    Ok(report(sys.laplacian(), x, b, fact.rank()))
}

/// `xᵀ L x` evaluated as `‖W^{1/2} B x‖₂²`.
pub fn energy_norm(f: &IncidenceFactors, x: &[f64]) -> f64 {
    f.apply_phi(x).iter().map(|v| v * v).sum()
}

/// Fills the error fields of `sparsified` relative to `exact`.
///
/// Success means `‖x_opt − x̃_opt‖_L ≤ ε ‖x_opt‖_L`; when `‖x_opt‖_L = 0`
/// the ratio is undefined and success requires an error below
/// [`ZERO_ENERGY_TOL`].
pub fn error_report(
    exact: &SolveReport,
    sparsified: &SolveReport,
    f: &IncidenceFactors,
    epsilon: f64,
) -> Result<SolveReport, SolveError> {
    check_dim(exact.x.len(), sparsified.x.len())?;
    check_dim(f.n(), exact.x.len())?;
    let diff: Vec<f64> = exact.x.iter().zip(&sparsified.x).map(|(a, b)| a - b).collect();
    let err = energy_norm(f, &diff);
    let base = energy_norm(f, &exact.x);
    let (relative, success) = if base > ZERO_ENERGY_TOL {
        let rel = err / base;
        (Some(rel), rel <= epsilon)
    } else {
        (None, err <= ZERO_ENERGY_TOL)
    };
    Ok(SolveReport {
        energy_error: Some(err),
        relative_energy_error: relative,
        success: Some(success),
        ..sparsified.clone()
    })
}
