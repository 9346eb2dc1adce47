use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, SchemeKind};
use super::fit::{golden_section_min, linear_fit, LinearFit};
use crate::analytic::exact_p1_params;
use crate::engine::{QaoaModel, QaoaParams};
use crate::error::{Error, Result};
use crate::optimizer::{optimize_model, summarize, task_seed, OptimizationResult, RestartFailure, Summary};
use crate::par;
use crate::sector::{parity_gap, ProblemSpec};

/// Classical critical field used to mark rows: 2 for p = 2 and the root of
/// the first-order condition, 1.2956, for p = 3. Markers never enter any
/// computation.
pub fn critical_field(p: u32) -> Option<f64> {
    match p {
        2 => Some(2.0),
        3 => Some(1.2956),
        _ => None,
    }
}

/// `(P - 2) / N` for even p and `(P - 1) / N` for odd p.
pub fn collapse_coordinate(spec: &ProblemSpec, depth: usize) -> f64 {
    let shift = if spec.p_is_even() { 2.0 } else { 1.0 };
    (depth as f64 - shift) / spec.n_sites as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_sites: u32,
    pub p_exponent: u32,
    pub field: f64,
    pub depth: usize,
    pub scheme: SchemeKind,
    pub critical_depth: usize,
    pub collapse: f64,
    pub critical_field: Option<f64>,
    pub n_restarts: usize,
    pub n_failed: usize,
    pub n_converged: usize,
    /// Residual-energy statistics over the successful restarts.
    pub residual: Option<Summary>,
    pub iterations: Option<Summary>,
    pub annealing_time_mean: Option<f64>,
    pub fidelity_mean: Option<f64>,
    /// Set when some or all restarts failed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub n_sites: u32,
    pub p_exponent: u32,
    pub field: f64,
    pub depth: usize,
    pub n_restarts: usize,
    pub n_failed: usize,
    pub n_converged: usize,
    pub iterations: Option<Summary>,
    pub residual_max: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Row {
    pub p_exponent: u32,
    pub n_sites: u32,
    /// `None` where no closed-form single-layer solution exists.
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub fidelity: Option<f64>,
    pub residual: Option<f64>,
    pub annealing_time: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub p_exponent: u32,
    pub n_sites: u32,
    /// Field at which the gap is smallest inside the scanned window.
    pub field_at_min: f64,
    pub min_gap: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapModel {
    /// `log gap = slope * log N + c`
    PowerLaw,
    /// `log gap = slope * N + c`
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapFit {
    pub p_exponent: u32,
    pub model: GapModel,
    pub fit: Option<LinearFit>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    pub rows: Vec<GapRow>,
    pub fits: Vec<GapFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "table", content = "data", rename_all = "kebab-case")]
pub enum Table {
    Sweep(Vec<SweepRow>),
    Iterations(Vec<IterationRow>),
    P1(Vec<P1Row>),
    Gap(GapTable),
}

impl Table {
    pub fn len(&self) -> usize {
        match self {
            Table::Sweep(r) => r.len(),
            Table::Iterations(r) => r.len(),
            Table::P1(r) => r.len(),
            Table::Gap(t) => t.rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when any row records a failed task.
    pub fn has_failures(&self) -> bool {
        match self {
            Table::Sweep(r) => r.iter().any(|x| x.error.is_some()),
            Table::Iterations(r) => r.iter().any(|x| x.error.is_some()),
            Table::P1(_) => false,
            Table::Gap(t) => t.rows.iter().any(|x| x.error.is_some()),
        }
    }
}

/// Validates `config` and runs the experiment it names.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Table> {
    config.validate()?;
    par::with_workers(config.workers, || match config.kind {
        ExperimentKind::Scaling => run_scaling_experiment(config).map(Table::Sweep),
        ExperimentKind::FieldSweep => run_field_sweep(config).map(Table::Sweep),
        ExperimentKind::IterationScaling => run_iteration_scaling(config).map(Table::Iterations),
        ExperimentKind::P1Table => run_p1_table(config).map(Table::P1),
        ExperimentKind::GapScaling => run_gap_scaling(config).map(Table::Gap),
    })
}

fn expect_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.kind != kind {
        return Err(Error::InvalidConfig(format!("expected a {kind:?} config, got {:?}", config.kind)));
    }
    config.validate()
}

struct GridPoint {
    model: usize,
    depth: usize,
    scheme: SchemeKind,
}

struct PointOutcome {
    results: Vec<OptimizationResult>,
    failures: Vec<RestartFailure>,
    model_error: Option<String>,
}

/// Every (N, p, h) of the config, in grid order.
fn problem_grid(config: &ExperimentConfig) -> Vec<(u32, u32, f64)> {
    let mut out = Vec::new();
    for &n in &config.n_sites {
        for &p in &config.p_exponents {
            for &h in &config.fields {
                out.push((n, p, h));
            }
        }
    }
    out
}

/// Runs every (grid point x restart) task as one flat parallel batch and
/// regroups the results per point.
fn run_points(
    config: &ExperimentConfig,
    problems: &[(u32, u32, f64)],
    points: &[GridPoint],
) -> (Vec<Result<QaoaModel>>, Vec<PointOutcome>) {
    let models: Vec<Result<QaoaModel>> =
        par::map_tasks(problems, |_, &(n, p, h)| ProblemSpec::new(n, p, h).and_then(QaoaModel::new));
    let tasks: Vec<(usize, usize)> = points
        .iter()
        .enumerate()
        .filter(|(_, pt)| models[pt.model].is_ok())
        .flat_map(|(i, _)| (0..config.n_restarts).map(move |r| (i, r)))
        .collect();
    let runs = par::map_tasks(&tasks, |_, &(i, r)| {
        let pt = &points[i];
        let model = models[pt.model].as_ref().expect("filtered above");
        let spec = model.spec();
        let seed = task_seed(config.base_seed, spec.n_sites, pt.depth, spec.field, r);
        (seed, optimize_model(model, pt.depth, config.scheme(pt.scheme), &config.optimizer, seed))
    });

    let mut outcomes: Vec<PointOutcome> = points
        .iter()
        .map(|pt| PointOutcome {
            results: Vec::new(),
            failures: Vec::new(),
            model_error: models[pt.model].as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    for (&(i, restart), (seed, run)) in tasks.iter().zip(runs) {
        match run {
            Ok(res) => outcomes[i].results.push(res),
            Err(e) => outcomes[i].failures.push(RestartFailure { restart, seed, message: e.to_string() }),
        }
    }
    (models, outcomes)
}

fn failure_message(outcome: &PointOutcome, n_restarts: usize) -> Option<String> {
    if let Some(e) = &outcome.model_error {
        return Some(e.clone());
    }
    outcome.failures.first().map(|f| {
        format!("{} of {} restarts failed; first (restart {}): {}", outcome.failures.len(), n_restarts, f.restart, f.message)
    })
}

fn sweep(config: &ExperimentConfig, depths_for: impl Fn(&ProblemSpec) -> Vec<usize>) -> Result<Vec<SweepRow>> {
    let problems = problem_grid(config);
    let mut schemes = config.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let mut points = Vec::new();
    for (m, &(n, p, h)) in problems.iter().enumerate() {
        let spec = ProblemSpec::new(n, p, h)?;
        for &scheme in &schemes {
            for depth in depths_for(&spec) {
                points.push(GridPoint { model: m, depth, scheme });
            }
        }
    }
    let (_, outcomes) = run_points(config, &problems, &points);

    let mut rows = Vec::with_capacity(points.len());
    for (pt, outcome) in points.iter().zip(outcomes) {
        let (n, p, h) = problems[pt.model];
        let spec = ProblemSpec::new(n, p, h)?;
        let error = failure_message(&outcome, config.n_restarts);
        let n_failed = config.n_restarts - outcome.results.len();
        let stats = summarize(outcome.results, outcome.failures).ok();
        rows.push(SweepRow {
            n_sites: n,
            p_exponent: p,
            field: h,
            depth: pt.depth,
            scheme: pt.scheme,
            critical_depth: spec.critical_depth(),
            collapse: collapse_coordinate(&spec, pt.depth),
            critical_field: critical_field(p),
            n_restarts: config.n_restarts,
            n_failed,
            n_converged: stats.as_ref().map_or(0, |s| s.n_converged),
            residual: stats.as_ref().map(|s| s.residual),
            iterations: stats.as_ref().map(|s| s.iterations),
            annealing_time_mean: stats.as_ref().map(|s| s.annealing_time.mean),
            fidelity_mean: stats.as_ref().map(|s| s.fidelity.mean),
            error,
        });
    }
    Ok(rows)
}

/// Residual-energy statistics over the (N, p, h, P) grid. An empty depth
/// grid means `1..=P*` for each N.
pub fn run_scaling_experiment(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    expect_kind(config, ExperimentKind::Scaling)?;
    sweep(config, |spec| {
        if config.depths.is_empty() {
            (1..=spec.critical_depth()).collect()
        } else {
            config.depths.clone()
        }
    })
}

/// Residual-energy statistics over the field grid at fixed depths, per scheme.
pub fn run_field_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    expect_kind(config, ExperimentKind::FieldSweep)?;
    sweep(config, |_| config.depths.clone())
}

/// BFGS iteration counts at `P = P*` for every (N, p, h), r-init.
pub fn run_iteration_scaling(config: &ExperimentConfig) -> Result<Vec<IterationRow>> {
    expect_kind(config, ExperimentKind::IterationScaling)?;
    let problems = problem_grid(config);
    let mut points = Vec::new();
    for (m, &(n, p, h)) in problems.iter().enumerate() {
        let depth = ProblemSpec::new(n, p, h)?.critical_depth();
        points.push(GridPoint { model: m, depth, scheme: SchemeKind::Random });
    }
    let (_, outcomes) = run_points(config, &problems, &points);
    let mut rows = Vec::with_capacity(points.len());
    for (pt, outcome) in points.iter().zip(outcomes) {
        let (n, p, h) = problems[pt.model];
        let error = failure_message(&outcome, config.n_restarts);
        let n_failed = config.n_restarts - outcome.results.len();
        let stats = summarize(outcome.results, outcome.failures).ok();
        rows.push(IterationRow {
            n_sites: n,
            p_exponent: p,
            field: h,
            depth: pt.depth,
            n_restarts: config.n_restarts,
            n_failed,
            n_converged: stats.as_ref().map_or(0, |s| s.n_converged),
            iterations: stats.as_ref().map(|s| s.iterations),
            residual_max: stats.as_ref().map(|s| s.residual.max),
            error,
        });
    }
    Ok(rows)
}

/// Linear fit of mean iteration count against N.
pub fn fit_iteration_scaling(rows: &[IterationRow]) -> Result<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.iterations.map(|s| (r.n_sites as f64, s.mean)))
        .unzip();
    linear_fit(&xs, &ys)
}

/// Closed-form single-layer angles evaluated through the simulator at
/// `h = 0`; rows without a closed form (even N) carry a note instead.
pub fn run_p1_table(config: &ExperimentConfig) -> Result<Vec<P1Row>> {
    expect_kind(config, ExperimentKind::P1Table)?;
    let mut grid = Vec::new();
    for &p in &config.p_exponents {
        for &n in &config.n_sites {
            grid.push((p, n));
        }
    }
    par::map_tasks(&grid, |_, &(p, n)| {
        let empty = P1Row {
            p_exponent: p,
            n_sites: n,
            gamma: None,
            beta: None,
            fidelity: None,
            residual: None,
            annealing_time: None,
            note: None,
        };
        let Some((gamma, beta)) = exact_p1_params(p, n)? else {
            return Ok(P1Row { note: Some("no closed form".into()), ..empty });
        };
        let model = QaoaModel::new(ProblemSpec::new(n, p, 0.0)?)?;
        let rec = model.evaluate(&QaoaParams::single(gamma, beta))?;
        Ok(P1Row {
            gamma: Some(gamma),
            beta: Some(beta),
            fidelity: Some(rec.fidelity),
            residual: Some(rec.residual),
            annealing_time: Some(rec.annealing_time),
            ..empty
        })
    })
    .into_iter()
    .collect()
}

fn gap_window(config: &ExperimentConfig, p: u32) -> [f64; 2] {
    config.gap_window.unwrap_or(if p == 2 { [1.5, 2.5] } else { [1.0, 1.6] })
}

/// Smallest parity-resolved gap over the field window: a grid scan followed
/// by golden-section refinement between the neighbours of the best grid point.
pub fn minimal_gap(n: u32, p: u32, window: [f64; 2], points: usize) -> Result<(f64, f64)> {
    let gap_at = |h: f64| ProblemSpec::new(n, p, h).and_then(|s| parity_gap(&s));
    let step = (window[1] - window[0]) / (points - 1) as f64;
    let hs: Vec<f64> = (0..points).map(|i| window[0] + step * i as f64).collect();
    let gaps = hs.iter().map(|&h| gap_at(h)).collect::<Result<Vec<f64>>>()?;
    let best = (0..points).min_by(|&a, &b| gaps[a].total_cmp(&gaps[b])).expect("points >= 3");
    let lo = hs[best.saturating_sub(1)];
    let hi = hs[(best + 1).min(points - 1)];
    let mut failure = None;
    let (h_ref, g_ref) = golden_section_min(
        |h| match gap_at(h) {
            Ok(g) => g,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        1e-12,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(if g_ref < gaps[best] { (h_ref, g_ref) } else { (hs[best], gaps[best]) })
}

/// Minimal gap per (p, N), with a power-law fit in N for p = 2 and an
/// exponential fit for p >= 3.
pub fn run_gap_scaling(config: &ExperimentConfig) -> Result<GapTable> {
    expect_kind(config, ExperimentKind::GapScaling)?;
    let mut grid = Vec::new();
    for &p in &config.p_exponents {
        for &n in &config.n_sites {
            grid.push((p, n));
        }
    }
    let rows: Vec<GapRow> = par::map_tasks(&grid, |_, &(p, n)| match minimal_gap(n, p, gap_window(config, p), config.gap_points) {
        Ok((h, g)) => GapRow { p_exponent: p, n_sites: n, field_at_min: h, min_gap: g, error: None },
        Err(e) => GapRow { p_exponent: p, n_sites: n, field_at_min: f64::NAN, min_gap: f64::NAN, error: Some(e.to_string()) },
    });
    let fits = config.p_exponents.iter().map(|&p| fit_gap_scaling(&rows, p)).collect();
    Ok(GapTable { rows, fits })
}

pub fn fit_gap_scaling(rows: &[GapRow], p: u32) -> GapFit {
    let model = if p == 2 { GapModel::PowerLaw } else { GapModel::Exponential };
    let usable: Vec<&GapRow> =
        rows.iter().filter(|r| r.p_exponent == p && r.error.is_none() && r.min_gap > 0.0).collect();
    let xs: Vec<f64> = usable
        .iter()
        .map(|r| match model {
            GapModel::PowerLaw => (r.n_sites as f64).ln(),
            GapModel::Exponential => r.n_sites as f64,
        })
        .collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.min_gap.ln()).collect();
    match linear_fit(&xs, &ys) {
        Ok(fit) => GapFit { p_exponent: p, model, fit: Some(fit), note: None },
        Err(e) => GapFit { p_exponent: p, model, fit: None, note: Some(e.to_string()) },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Exponent `b` in `residual ~ (1 - P/P*)^b`.
    pub exponent: f64,
    pub fit: LinearFit,
}

/// Fits `log(mean residual) = b log(1 - P/P*) + c` over rows with
/// `0.1 <= P/P* <= 0.9`. Rows with mean residual below `1e-10` count as
/// exact and are left out. Rows are expected to share (N, p, h, scheme).
pub fn fit_scaling_exponent(rows: &[SweepRow]) -> Result<ScalingFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in rows {
        let Some(res) = row.residual else { continue };
        let ratio = row.depth as f64 / row.critical_depth as f64;
        if !(0.1..=0.9).contains(&ratio) || !(res.mean >= EXACT_RESIDUAL) {
            continue;
        }
        xs.push((1.0 - ratio).ln());
        ys.push(res.mean.ln());
    }
    if xs.len() < 3 {
        return Err(Error::FitRefused(format!("{} usable rows, need at least 3", xs.len())));
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(ScalingFit { exponent: fit.slope, fit })
}

/// Residuals below this are treated as exact zeros.
pub const EXACT_RESIDUAL: f64 = 1e-10;
