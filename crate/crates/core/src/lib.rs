//! Laplacian least-squares by leverage-score edge sampling.
//!
//! The pipeline, for a weighted graph `G` and right-hand side `b`:
//!
//! 1. [`graph::incidence_factors`] builds `B`, `W` and `Φ = W^{1/2} B`.
//! 2. [`spectral::spectral_profile`] computes `U_Φ`, the leverage scores
//!    `ℓ_i` and effective resistances `R_i = ℓ_i / w_i`.
//! 3. [`spectral::leverage_probabilities`] turns them into sampling
//!    probabilities and [`sampler::sample_count`] picks `r`.
//! 4. [`sampler::build_sparsifier`] draws `r` edges and assembles `L̃`.
//! 5. [`solver::solve_sparsified`] returns `x̃ = L̃† b`, and
//!    [`solver::error_report`] compares it against [`solver::solve_exact`].

pub mod generators;
pub mod graph;
pub mod sampler;
pub mod solver;
pub mod spectral;

pub use graph::{
    incidence_factors, laplacian_of, load_graph, load_graph_file, load_vector, load_vector_file, write_graph,
    write_vector, Edge, GraphError, IncidenceFactors, Laplacian, WeightedGraph,
};
pub use sampler::{
    build_sparsifier, concentration_check, draw_samples, exactly_c, sample_count, ConcentrationReport,
    SampleCountSource, SamplingError, SamplingPlan, SparsifiedSystem,
};
pub use solver::{energy_norm, error_report, solve_exact, solve_sparsified, SolveError, SolveReport};
pub use spectral::{
    effective_resistances, leverage_probabilities, profile_graph, spectral_profile, ProbabilityError,
    SpectralError, SpectralProfile,
};
