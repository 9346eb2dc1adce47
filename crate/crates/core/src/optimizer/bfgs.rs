//! Dense BFGS on the inverse Hessian with a strong-Wolfe line search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Stop once the gradient infinity-norm drops to this.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    /// Stop when an accepted step lowers the value by less than this,
    /// relative to `max(|f|, 1)`.
    pub stagnation_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { grad_tol: 1e-9, max_iters: 10_000, wolfe_c1: 1e-4, wolfe_c2: 0.9, stagnation_tol: 1e-15 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < c1 < c2 < 1, got c1={}, c2={}",
                self.wolfe_c1, self.wolfe_c2
            )));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidConfig("grad_tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        if !(self.stagnation_tol >= 0.0) {
            return Err(Error::InvalidConfig("stagnation_tol must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GradientTolerance,
    Stagnation,
    MaxIterations,
    LineSearchFailure,
}

impl Termination {
    pub fn is_converged(self) -> bool {
        matches!(self, Termination::GradientTolerance | Termination::Stagnation)
    }
}

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub n_iters: usize,
    pub n_evals: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Objective value after each accepted step, starting with `f(x0)`.
    pub trace: Vec<f64>,
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Probe {
    alpha: f64,
    value: f64,
    slope: f64,
    x: Vec<f64>,
    gradient: Vec<f64>,
}

struct LineSearch<'a, F> {
    objective: &'a mut F,
    x: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
    evals: usize,
    best: Option<Probe>,
}

impl<'a, F: FnMut(&[f64]) -> (f64, Vec<f64>)> LineSearch<'a, F> {
    const MAX_EXPANSIONS: usize = 40;
    const MAX_ZOOM: usize = 60;

    fn probe(&mut self, alpha: f64) -> Probe {
        let x: Vec<f64> = self.x.iter().zip(self.dir).map(|(xi, di)| xi + alpha * di).collect();
        let (value, gradient) = (self.objective)(&x);
        self.evals += 1;
        let slope = dot(&gradient, self.dir);
        let probe = Probe { alpha, value, slope, x, gradient };
        let better = value.is_finite() && value < self.best.as_ref().map_or(self.f0, |b| b.value);
        if better {
            self.best = Some(Probe { x: probe.x.clone(), gradient: probe.gradient.clone(), ..probe });
        }
        probe
    }

    fn armijo(&self, p: &Probe) -> bool {
        p.value.is_finite() && p.value <= self.f0 + self.c1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Probe) -> bool {
        p.slope.abs() <= -self.c2 * self.slope0
    }

    /// Bracketing phase; returns a step satisfying both strong-Wolfe conditions.
    fn run(&mut self, alpha_init: f64) -> Option<Probe> {
        let mut prev = Probe { alpha: 0.0, value: self.f0, slope: self.slope0, x: Vec::new(), gradient: Vec::new() };
        let mut alpha = alpha_init;
        for i in 0..Self::MAX_EXPANSIONS {
            let cur = self.probe(alpha);
            if !self.armijo(&cur) || (i > 0 && cur.value >= prev.value) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                return Some(cur);
            }
            if cur.slope >= 0.0 {
                return self.zoom(cur, prev);
            }
            alpha *= 2.0;
            prev = cur;
        }
        None
    }

    fn zoom(&mut self, mut lo: Probe, mut hi: Probe) -> Option<Probe> {
        for _ in 0..Self::MAX_ZOOM {
            let width = hi.alpha - lo.alpha;
            if width.abs() <= f64::EPSILON * lo.alpha.abs().max(hi.alpha.abs()).max(f64::MIN_POSITIVE) {
                return None;
            }
            let alpha = interpolate(&lo, &hi);
            let cur = self.probe(alpha);
            if !self.armijo(&cur) || cur.value >= lo.value {
                hi = cur;
            } else {
                if self.curvature(&cur) {
                    return Some(cur);
                }
                if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = cur;
            }
        }
        None
    }
}

/// Safeguarded cubic interpolation between two probes, falling back to
/// bisection when the minimiser is undefined or too close to an end.
fn interpolate(lo: &Probe, hi: &Probe) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let mid = 0.5 * (a + b);
    if !(hi.value.is_finite() && hi.slope.is_finite()) {
        return mid;
    }
    let d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = hi.slope - lo.slope + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let alpha = b - (b - a) * (hi.slope + d2 - d1) / denom;
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (right - left);
    if alpha.is_finite() && alpha > left + margin && alpha < right - margin {
        alpha
    } else {
        mid
    }
}

/// Minimises `objective` from `x0`.
///
/// `objective` returns the value and gradient. The run is a deterministic
/// function of its inputs. A failed line search first resets the inverse
/// Hessian to the identity; a second consecutive failure stops the run at
/// the best point seen.
pub fn bfgs_minimize<F>(objective: F, x0: &[f64], config: &OptimizerConfig) -> BfgsOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    bfgs_minimize_scaled(objective, x0, &vec![1.0; x0.len()], config)
}

/// BFGS in the coordinates `x_i / scale_i`.
///
/// Equivalent to [`bfgs_minimize`] applied to `y -> f(scale * y)`, but
/// expressed in the original variables through the initial inverse Hessian
/// `diag(scale^2)`; gradients, tolerances and the returned point all refer
/// to `x`. Useful when the curvature along different coordinates differs
/// by orders of magnitude.
pub fn bfgs_minimize_scaled<F>(mut objective: F, x0: &[f64], scale: &[f64], config: &OptimizerConfig) -> BfgsOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    assert_eq!(scale.len(), x0.len(), "one scale per coordinate");
    let d2: Vec<f64> = scale.iter().map(|s| s * s).collect();
    let identity = || diagonal(&d2);
    let mut x = x0.to_vec();
    let (mut f, mut g) = objective(&x);
    let mut n_evals = 1;
    let mut trace = vec![f];
    let mut h = identity();
    let mut h_is_identity = true;
    let mut n_iters = 0;

    let termination = loop {
        if inf_norm(&g) <= config.grad_tol {
            break Termination::GradientTolerance;
        }
        if n_iters >= config.max_iters {
            break Termination::MaxIterations;
        }

        let mut dir = mat_vec_neg(&h, &g);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            h = identity();
            h_is_identity = true;
            dir = g.iter().zip(&d2).map(|(v, d)| -v * d).collect();
            slope = dot(&g, &dir);
        }
        // With no curvature information yet, aim for a displacement of at
        // most `1 / |g|`: the QAOA landscape oscillates on a length scale
        // that shrinks as its gradients grow, and a longer first step tends
        // to leap over the nearest basin.
        let alpha_init = if h_is_identity {
            let gn = dir.iter().zip(scale).fold(0.0f64, |m, (d, s)| m.max((d / s).abs()));
            (1.0 / gn).min(1.0) / gn
        } else {
            1.0
        };

        let mut search = LineSearch {
            objective: &mut objective,
            x: &x,
            dir: &dir,
            f0: f,
            slope0: slope,
            c1: config.wolfe_c1,
            c2: config.wolfe_c2,
            evals: 0,
            best: None,
        };
        let accepted = search.run(alpha_init);
        n_evals += search.evals;
        let best = search.best.take();

        let step = match accepted {
            Some(p) => p,
            None if !h_is_identity => {
                h = identity();
                h_is_identity = true;
                continue;
            }
            None => {
                if let Some(b) = best {
                    x = b.x;
                    f = b.value;
                    g = b.gradient;
                    trace.push(f);
                }
                break Termination::LineSearchFailure;
            }
        };

        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.gradient.iter().zip(&g).map(|(a, b)| a - b).collect();
        let decrease = f - step.value;
        x = step.x;
        f = step.value;
        g = step.gradient;
        trace.push(f);
        n_iters += 1;

        let sy = dot(&s, &y);
        if sy > f64::EPSILON * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if h_is_identity {
                let yhy: f64 = y.iter().zip(&d2).map(|(v, d)| v * v * d).sum();
                let factor = sy / yhy;
                h.iter_mut().for_each(|v| *v *= factor);
            }
            bfgs_update(&mut h, &s, &y, sy);
            h_is_identity = false;
        }

        if inf_norm(&g) <= config.grad_tol {
            break Termination::GradientTolerance;
        }
        if decrease <= config.stagnation_tol * f.abs().max(1.0) {
            break Termination::Stagnation;
        }
    };

    BfgsOutcome {
        converged: termination.is_converged(),
        x,
        value: f,
        gradient: g,
        n_iters,
        n_evals,
        termination,
        trace,
    }
}

fn diagonal(d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = d[i];
    }
    m
}

fn mat_vec_neg(h: &[f64], g: &[f64]) -> Vec<f64> {
    let n = g.len();
    (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], g)).collect()
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`, `rho = 1 / y^T s`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
