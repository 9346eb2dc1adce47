//! Starting points for the optimizer.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::QaoaParams;
use crate::error::{Error, Result};
use crate::sector::ProblemSpec;

pub const DEFAULT_DT: f64 = 1.0;
pub const DEFAULT_NOISE_AMPLITUDE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum InitScheme {
    /// Every angle uniform in `[0, pi]`.
    Random,
    /// Trotterised linear annealing schedule with multiplicative noise.
    Linear { dt: f64, noise_amplitude: f64 },
}

impl InitScheme {
    pub fn linear_default() -> Self {
        InitScheme::Linear { dt: DEFAULT_DT, noise_amplitude: DEFAULT_NOISE_AMPLITUDE }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InitScheme::Random => Ok(()),
            InitScheme::Linear { dt, noise_amplitude } => {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
                }
                if !(noise_amplitude >= 0.0 && noise_amplitude.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "noise_amplitude must be >= 0, got {noise_amplitude}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Short label used in tables: `r` or `l`.
    pub fn label(&self) -> &'static str {
        match self {
            InitScheme::Random => "r",
            InitScheme::Linear { .. } => "l",
        }
    }

    pub fn initial_params(&self, spec: &ProblemSpec, depth: usize, seed: u64) -> Result<QaoaParams> {
        self.validate()?;
        match *self {
            InitScheme::Random => r_init(depth, seed),
            InitScheme::Linear { dt, noise_amplitude } => l_init(depth, spec, dt, noise_amplitude, seed),
        }
    }
}

/// `2P` independent draws from `U[0, pi]`: all gammas first, then all betas.
pub fn r_init(depth: usize, seed: u64) -> Result<QaoaParams> {
    if depth == 0 {
        return Err(Error::InvalidParams("depth must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gammas = (0..depth).map(|_| rng.gen_range(0.0..=PI)).collect();
    let betas = (0..depth).map(|_| rng.gen_range(0.0..=PI)).collect();
    QaoaParams::new(gammas, betas)
}

/// Linear schedule `s_m = m / P`:
/// `gamma_m = dt s_m / N^(p-1)`, `beta_m = dt (1 - s_m (1 - h))`,
/// each multiplied by `1 + r` with `r ~ U[-a, a]` drawn per entry.
pub fn l_init(depth: usize, spec: &ProblemSpec, dt: f64, noise_amplitude: f64, seed: u64) -> Result<QaoaParams> {
    if depth == 0 {
        return Err(Error::InvalidParams("depth must be >= 1".into()));
    }
    InitScheme::Linear { dt, noise_amplitude }.validate()?;
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = || {
        if noise_amplitude > 0.0 {
            1.0 + rng.gen_range(-noise_amplitude..=noise_amplitude)
        } else {
            1.0
        }
    };
    let scale = spec.interaction_scale();
    let p = depth as f64;
    let gammas: Vec<f64> = (1..=depth).map(|m| dt * (m as f64 / p) / scale * noise()).collect();
    let betas: Vec<f64> = (1..=depth)
        .map(|m| dt * (1.0 - (m as f64 / p) * (1.0 - spec.field)) * noise())
        .collect();
    QaoaParams::new(gammas, betas)
}
