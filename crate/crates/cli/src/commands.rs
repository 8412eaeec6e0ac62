//! The five harness modes. Each `cmd_*` works on an already-loaded
//! [`Problem`] so that tests can drive the pipeline without files.

use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use resist_core::sampler::{exactly_c_condition, rng_for, trial_seed, SparsifiedSystem};
use resist_core::spectral::RowFactorization;
use resist_core::{
    build_sparsifier, effective_resistances, error_report, laplacian_of, leverage_probabilities,
    load_graph_file, load_vector_file, solve_exact, solve_sparsified, spectral_profile, incidence_factors,
    IncidenceFactors, Laplacian, SamplingPlan, SolveReport, SpectralProfile, WeightedGraph,
};

use crate::config::{Mode, RunConfig};
use crate::error::HarnessError;
use crate::report::*;

/// A graph with its factors, spectral profile and sampling distribution.
#[derive(Debug, Clone)]
pub struct Problem {
    pub graph: WeightedGraph,
    pub factors: IncidenceFactors,
    pub laplacian: Laplacian,
    pub profile: SpectralProfile,
    pub probabilities: Vec<f64>,
}

impl Problem {
    pub fn new(graph: WeightedGraph, beta: f64) -> Result<Self, HarnessError> {
        let factors = incidence_factors(&graph);
        let laplacian = laplacian_of(&graph);
        let profile = spectral_profile(&factors)?;
        let probabilities = leverage_probabilities(&profile, beta)?;
        Ok(Problem {
            graph,
            factors,
            laplacian,
            profile,
            probabilities,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    /// Theorem-sized plan, or the override when one is configured.
    pub fn plan(&self, cfg: &RunConfig, seed: u64) -> Result<SamplingPlan, HarnessError> {
        let p = self.probabilities.clone();
        Ok(match cfg.r_override {
            Some(r) => SamplingPlan::with_sample_count(p, r, cfg.epsilon, cfg.beta, cfg.c0, seed)?,
            None => SamplingPlan::new(p, self.n(), cfg.epsilon, cfg.beta, cfg.c0, seed)?,
        })
    }

    fn lemma_max_relerr(&self) -> (Vec<f64>, f64) {
        let r = effective_resistances(&self.graph);
        let err = resist_core::spectral::lemma_relative_error(&self.profile.leverage, self.factors.weights(), &r);
        (r, err)
    }
}

/// Standard normal vector projected onto `1⊥`, seeded independently of
/// every trial stream.
pub fn default_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(trial_seed(seed, u64::MAX));
    let mut b: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mean = b.iter().sum::<f64>() / n as f64;
    b.iter_mut().for_each(|x| *x -= mean);
    b
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn rhs_for(problem: &Problem, b: Option<Vec<f64>>, seed: u64) -> Result<Vec<f64>, HarnessError> {
    match b {
        Some(b) if b.len() != problem.n() => Err(HarnessError::Config(format!(
            "right-hand side has {} entries, graph has {} vertices",
            b.len(),
            problem.n()
        ))),
        Some(b) => Ok(b),
        None => Ok(default_rhs(problem.n(), seed)),
    }
}

/// Loads the configured files and dispatches on the mode.
pub fn run(cfg: &RunConfig) -> Result<Report, HarnessError> {
    cfg.validate()?;
    let path = cfg
        .graph_path
        .as_ref()
        .ok_or_else(|| HarnessError::Config("--graph is required".into()))?;
    let graph = load_graph_file(path).map_err(|source| HarnessError::Input {
        path: path.display().to_string(),
        source,
    })?;
    let b = match &cfg.b_path {
        Some(p) => Some(load_vector_file(p).map_err(|source| HarnessError::Input {
            path: p.display().to_string(),
            source,
        })?),
        None => None,
    };
    run_with(graph, b, cfg)
}

pub fn run_with(graph: WeightedGraph, b: Option<Vec<f64>>, cfg: &RunConfig) -> Result<Report, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let problem = Problem::new(graph, cfg.beta)?;
    let spectral_ms = elapsed_ms(start);
    let total = || Timings {
        total_ms: elapsed_ms(start),
    };
    let results = match cfg.mode {
        Mode::Leverage => Results::Leverage(LeverageResults {
            timings: total(),
            ..cmd_leverage(&problem, cfg)
        }),
        Mode::Resistance => Results::Resistance(ResistanceResults {
            timings: total(),
            ..cmd_resistance(&problem)
        }),
        Mode::Sparsify => {
            let res = cmd_sparsify(&problem, cfg)?;
            Results::Sparsify(SparsifyResults { timings: total(), ..res })
        }
        Mode::Solve => {
            let b = rhs_for(&problem, b, cfg.seed)?;
            let mut res = cmd_solve(&problem, &b, cfg)?;
            res.timings.spectral_ms = spectral_ms;
            res.timings.total_ms = elapsed_ms(start);
            Results::Solve(res)
        }
        Mode::Verify => {
            let b = rhs_for(&problem, b, cfg.seed)?;
            let res = cmd_verify(&problem, &b, cfg)?;
            Results::Verify(VerifyReport { timings: total(), ..res })
        }
    };
    Ok(Report {
        mode: cfg.mode,
        config: cfg.clone(),
        results,
        version: VERSION,
    })
}

pub fn cmd_leverage(problem: &Problem, cfg: &RunConfig) -> LeverageResults {
    let p = &problem.profile;
    LeverageResults {
        n: problem.n(),
        m: problem.m(),
        rank: p.rank,
        leverage: p.leverage.clone(),
        resistance: p.resistance.clone(),
        probabilities: problem.probabilities.clone(),
        total_leverage: p.total_leverage(),
        max_leverage: p.max_leverage(),
        beta: cfg.beta,
        timings: Timings::default(),
    }
}

pub fn cmd_resistance(problem: &Problem) -> ResistanceResults {
    let (resistance, lemma_max_relerr) = problem.lemma_max_relerr();
    ResistanceResults {
        n: problem.n(),
        m: problem.m(),
        rank: problem.profile.rank,
        resistance,
        resistance_from_leverage: problem.profile.resistance.clone(),
        lemma_max_relerr,
        timings: Timings::default(),
    }
}

fn sparsifier_rank(sys: &SparsifiedSystem) -> Result<usize, HarnessError> {
    RowFactorization::new(sys.scaled_rows())
        .map(|f| f.rank())
        .ok_or(HarnessError::Solve(resist_core::SolveError::Factorization))
}

pub fn cmd_sparsify(problem: &Problem, cfg: &RunConfig) -> Result<SparsifyResults, HarnessError> {
    let plan = problem.plan(cfg, cfg.seed)?;
    let sys = build_sparsifier(&problem.factors, &plan)?;
    let conc = sys.concentration(&problem.profile.basis, &plan);
    Ok(SparsifyResults {
        n: problem.n(),
        m: problem.m(),
        r: plan.r,
        r_source: plan.source,
        distinct_edges: sys.distinct_edges(),
        nnz: sys.nnz(),
        nnz_bound: problem.n() + 2 * plan.r.min(problem.m()),
        rank: problem.profile.rank,
        sparsifier_rank: sparsifier_rank(&sys)?,
        concentration: ConcentrationSummary::new(conc, cfg.epsilon),
        sampled_edges: sys
            .sampled_edges()
            .iter()
            .map(|e| SampledEdgeRecord {
                index: e.index,
                count: e.count,
                weight: e.weight,
            })
            .collect(),
        timings: Timings::default(),
    })
}

struct Trial {
    plan: SamplingPlan,
    sys: SparsifiedSystem,
    sparsified: SolveReport,
}

fn run_trial(problem: &Problem, b: &[f64], exact: &SolveReport, cfg: &RunConfig, seed: u64) -> Result<Trial, HarnessError> {
    let plan = problem.plan(cfg, seed)?;
    let sys = build_sparsifier(&problem.factors, &plan)?;
    let approx = solve_sparsified(&sys, b)?;
    let sparsified = error_report(exact, &approx, &problem.factors, cfg.epsilon)?;
    Ok(Trial { plan, sys, sparsified })
}

pub fn cmd_solve(problem: &Problem, b: &[f64], cfg: &RunConfig) -> Result<SolveResults, HarnessError> {
    let start = Instant::now();
    let exact = solve_exact(&problem.laplacian, &problem.profile, b)?;
    let t_sparsify = Instant::now();
    let plan = problem.plan(cfg, cfg.seed)?;
    let sys = build_sparsifier(&problem.factors, &plan)?;
    let sparsify_ms = elapsed_ms(t_sparsify);
    let t_solve = Instant::now();
    let approx = solve_sparsified(&sys, b)?;
    let sparsified = error_report(&exact, &approx, &problem.factors, cfg.epsilon)?;
    let solve_ms = elapsed_ms(t_solve);
    let conc = sys.concentration(&problem.profile.basis, &plan);
    Ok(SolveResults {
        n: problem.n(),
        m: problem.m(),
        epsilon: cfg.epsilon,
        r: plan.r,
        r_source: plan.source,
        distinct_edges: sys.distinct_edges(),
        nnz: sys.nnz(),
        rank: problem.profile.rank,
        sparsifier_rank: sparsified.rank,
        b: b.to_vec(),
        relative_energy_error: sparsified.relative_energy_error,
        success: sparsified.success == Some(true),
        exact,
        sparsified,
        concentration: ConcentrationSummary::new(conc, cfg.epsilon),
        timings: SolveTimings {
            total_ms: elapsed_ms(start),
            spectral_ms: 0.0,
            sparsify_ms,
            solve_ms,
        },
    })
}

pub fn cmd_verify(problem: &Problem, b: &[f64], cfg: &RunConfig) -> Result<VerifyReport, HarnessError> {
    let exact = solve_exact(&problem.laplacian, &problem.profile, b)?;
    let records = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.seed, t as u64);
            let trial = run_trial(problem, b, &exact, cfg, seed)?;
            let conc = trial.sys.concentration(&problem.profile.basis, &trial.plan);
            Ok((
                trial.plan.r,
                trial.plan.source,
                TrialRecord {
                    trial: t,
                    seed,
                    relative_energy_error: trial.sparsified.relative_energy_error,
                    energy_error: trial.sparsified.energy_error.unwrap_or(0.0),
                    success: trial.sparsified.success == Some(true),
                    concentration_deviation: conc.deviation,
                    min_sv_sq: conc.min_sv_sq,
                    max_sv_sq: conc.max_sv_sq,
                    max_sv_deviation: conc.max_sv_deviation(),
                    sparsifier_rank: trial.sparsified.rank,
                    distinct_edges: trial.sys.distinct_edges(),
                    nnz: trial.sys.nnz(),
                },
            ))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let (r, r_source) = (records[0].0, records[0].1);
    let per_trial: Vec<TrialRecord> = records.into_iter().map(|(_, _, rec)| rec).collect();

    let trials = per_trial.len();
    let tn = trials as f64;
    let success_count = per_trial.iter().filter(|t| t.success).count();
    let success_rate = success_count as f64 / tn;
    let probability_bound = 2.0 / 3.0;

    let devs: Vec<f64> = per_trial.iter().map(|t| t.concentration_deviation).collect();
    let mean = devs.iter().sum::<f64>() / tn;
    let se = if trials > 1 {
        let var = devs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (tn - 1.0);
        (var / tn).sqrt()
    } else {
        0.0
    };
    let expected_deviation_bound = cfg.epsilon.sqrt() / 6.0;
    let concentration_bound = cfg.epsilon.sqrt() / 2.0;
    let sv_devs: Vec<f64> = per_trial.iter().map(|t| t.max_sv_deviation).collect();
    let concentration_success_count = sv_devs.iter().filter(|&&d| d <= concentration_bound).count();
    let rel: Vec<f64> = per_trial.iter().filter_map(|t| t.relative_energy_error).collect();
    let median_relative_energy_error = (!rel.is_empty()).then(|| Quantiles::of(&rel).median);
    let full_rank_trials = per_trial.iter().filter(|t| t.sparsifier_rank == problem.profile.rank).count();
    let (_, lemma_max_relerr) = problem.lemma_max_relerr();
    let rank = problem.profile.rank;

    Ok(VerifyReport {
        n: problem.n(),
        m: problem.m(),
        rank,
        trials,
        success_count,
        success_rate,
        probability_bound,
        meets_probability_bound: success_rate >= probability_bound,
        epsilon: cfg.epsilon,
        beta: cfg.beta,
        c0: cfg.c0,
        r,
        r_source,
        max_leverage: problem.profile.max_leverage(),
        median_relative_energy_error,
        mean_concentration_deviation: mean,
        concentration_standard_error: se,
        expected_deviation_bound,
        mean_deviation_within_bound: mean <= expected_deviation_bound + 2.0 * se,
        concentration_bound,
        concentration_success_count,
        concentration_success_rate: concentration_success_count as f64 / tn,
        max_sv_deviation_quantiles: Quantiles::of(&sv_devs),
        full_rank_trials,
        lemma_max_relerr,
        exactly_c_condition: exactly_c_condition(rank as f64, expected_deviation_bound, cfg.beta, cfg.c0),
        per_trial,
        timings: Timings::default(),
    })
}
