//! Local minimisation of the circuit energy from random or schedule-based
//! starting points, single runs and seeded multi-start statistics.

mod bfgs;
mod init;
mod seed;

pub use bfgs::{bfgs_minimize, bfgs_minimize_scaled, inf_norm, BfgsOutcome, OptimizerConfig, Termination};
pub use init::{l_init, r_init, InitScheme, DEFAULT_DT, DEFAULT_NOISE_AMPLITUDE};
pub use seed::{derive_seed, task_seed};

use serde::{Deserialize, Serialize};

use crate::engine::{EvaluationRecord, QaoaModel, QaoaParams};
use crate::error::Result;
use crate::par;
use crate::sector::ProblemSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub params_star: QaoaParams,
    pub record: EvaluationRecord,
    pub n_iters: usize,
    pub n_evals: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Gradient infinity-norm at `params_star`.
    pub gradient_norm: f64,
    pub scheme: InitScheme,
    pub seed: u64,
}

/// Natural length scales of the angles: the phase layer is generated by
/// `(Sum sigma^z)^p`, whose spectrum is `N^(p-1)` times wider than that of
/// the normalised interaction, so gammas are measured in units of
/// `1 / N^(p-1)` and betas in radians.
pub fn coordinate_scales(spec: &ProblemSpec, depth: usize) -> Vec<f64> {
    let g = 1.0 / spec.interaction_scale();
    let mut s = vec![g; depth];
    s.extend(std::iter::repeat(1.0).take(depth));
    s
}

/// Runs BFGS on the circuit energy from the scheme's starting point, in
/// the coordinates given by [`coordinate_scales`].
pub fn optimize_model(
    model: &QaoaModel,
    depth: usize,
    scheme: InitScheme,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationResult> {
    config.validate()?;
    let x0 = scheme.initial_params(model.spec(), depth, seed)?.to_flat();
    let outcome = bfgs_minimize_scaled(
        |x: &[f64]| match QaoaParams::from_flat(x) {
            Ok(params) => model.energy_and_gradient(&params),
            Err(_) => (f64::INFINITY, vec![0.0; x.len()]),
        },
        &x0,
        &coordinate_scales(model.spec(), depth),
        config,
    );
    let params_star = QaoaParams::from_flat(&outcome.x)?;
    let record = model.evaluate(&params_star)?;
    Ok(OptimizationResult {
        params_star,
        record,
        n_iters: outcome.n_iters,
        n_evals: outcome.n_evals,
        converged: outcome.converged,
        termination: outcome.termination,
        gradient_norm: inf_norm(&outcome.gradient),
        scheme,
        seed,
    })
}

pub fn optimize(
    spec: &ProblemSpec,
    depth: usize,
    scheme: InitScheme,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationResult> {
    let model = QaoaModel::new(*spec)?;
    optimize_model(&model, depth, scheme, config, seed)
}

/// Sample statistics that do not depend on the order of the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator, zero for one value).
    pub std: f64,
    /// `std / sqrt(n)`.
    pub std_of_mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let mut sq: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
        sq.sort_by(f64::total_cmp);
        let std = if sorted.len() > 1 { (sq.iter().sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
        Some(Self {
            count: sorted.len(),
            mean,
            std,
            std_of_mean: std / n.sqrt(),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartFailure {
    pub restart: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStartStats {
    pub residual: Summary,
    pub iterations: Summary,
    pub fidelity: Summary,
    pub annealing_time: Summary,
    pub n_converged: usize,
    /// Successful restarts in restart order; non-converged runs are kept.
    pub results: Vec<OptimizationResult>,
    pub failures: Vec<RestartFailure>,
}

impl MultiStartStats {
    pub fn best(&self) -> Option<&OptimizationResult> {
        self.results.iter().min_by(|a, b| a.record.residual.total_cmp(&b.record.residual))
    }
}

/// `n_restarts` independent runs; restart `r` uses
/// `task_seed(base_seed, N, depth, h, r)`. Restarts may run concurrently.
/// Failed restarts are reported in `failures`; an error is returned only
/// for invalid inputs or when every restart fails.
pub fn multi_start_model(
    model: &QaoaModel,
    depth: usize,
    scheme: InitScheme,
    n_restarts: usize,
    base_seed: u64,
    config: &OptimizerConfig,
) -> Result<MultiStartStats> {
    if n_restarts == 0 {
        return Err(crate::Error::InvalidConfig("n_restarts must be >= 1".into()));
    }
    config.validate()?;
    scheme.validate()?;
    let spec = model.spec();
    let seeds: Vec<u64> =
        (0..n_restarts).map(|r| task_seed(base_seed, spec.n_sites, depth, spec.field, r)).collect();
    let runs = par::map_tasks(&seeds, |_, &seed| optimize_model(model, depth, scheme, config, seed));
    let mut results = Vec::with_capacity(n_restarts);
    let mut failures = Vec::new();
    for (restart, (run, &seed)) in runs.into_iter().zip(&seeds).enumerate() {
        match run {
            Ok(r) => results.push(r),
            Err(e) => failures.push(RestartFailure { restart, seed, message: e.to_string() }),
        }
    }
    summarize(results, failures)
}

pub fn multi_start(
    spec: &ProblemSpec,
    depth: usize,
    scheme: InitScheme,
    n_restarts: usize,
    base_seed: u64,
    config: &OptimizerConfig,
) -> Result<MultiStartStats> {
    let model = QaoaModel::new(*spec)?;
    multi_start_model(&model, depth, scheme, n_restarts, base_seed, config)
}

/// Aggregates finished restarts.
pub fn summarize(results: Vec<OptimizationResult>, failures: Vec<RestartFailure>) -> Result<MultiStartStats> {
    let column = |f: fn(&OptimizationResult) -> f64| {
        Summary::of(&results.iter().map(f).collect::<Vec<_>>())
    };
    let residual = column(|r| r.record.residual);
    let Some(residual) = residual else {
        let detail = failures.first().map(|f| f.message.clone()).unwrap_or_default();
        return Err(crate::Error::InvalidConfig(format!("every restart failed: {detail}")));
    };
    Ok(MultiStartStats {
        residual,
        iterations: column(|r| r.n_iters as f64).expect("non-empty"),
        fidelity: column(|r| r.record.fidelity).expect("non-empty"),
        annealing_time: column(|r| r.record.annealing_time).expect("non-empty"),
        n_converged: results.iter().filter(|r| r.converged).count(),
        results,
        failures,
    })
}
