//! Self-checks of the closed-form solutions, the landscape symmetries and
//! the power congruence behind the even-p angles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::analytic::{exact_p1_params, p1_fidelity_closed_form, symmetry_transforms, verify_power_identity};
use crate::engine::{QaoaModel, QaoaParams};
use crate::error::Result;
use crate::sector::ProblemSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

const FIDELITY_TOL: f64 = 1e-12;
const ENERGY_TOL: f64 = 1e-12;

/// Smallest single-layer fidelity of the closed-form angles over the grid.
pub fn min_p1_fidelity(ps: &[u32], ns: &[u32]) -> Result<(f64, u32, u32)> {
    let mut worst = (f64::INFINITY, 0, 0);
    for &p in ps {
        for &n in ns {
            let Some((gamma, beta)) = exact_p1_params(p, n)? else { continue };
            let model = QaoaModel::new(ProblemSpec::new(n, p, 0.0)?)?;
            let f = model.evaluate(&QaoaParams::single(gamma, beta))?.fidelity;
            if f < worst.0 {
                worst = (f, p, n);
            }
        }
    }
    Ok(worst)
}

/// Largest energy change under any symmetry transform, over `samples`
/// random circuits drawn across both parities of p and N.
pub fn max_symmetry_violation(samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = rng.gen_range(2..=3u32);
        let n = rng.gen_range(4..=7u32);
        let depth = rng.gen_range(1..=4usize);
        let model = QaoaModel::new(ProblemSpec::new(n, p, rng.gen_range(0.0..2.0))?)?;
        let gammas = (0..depth).map(|_| rng.gen_range(0.0..PI)).collect();
        let betas = (0..depth).map(|_| rng.gen_range(0.0..PI)).collect();
        let params = QaoaParams::new(gammas, betas)?;
        let e0 = model.energy(&params);
        for t in symmetry_transforms(p, n, depth) {
            worst = worst.max((model.energy(&t.apply(&params)) - e0).abs());
        }
    }
    Ok(worst)
}

/// Counts `(k, n, m)` triples with `k <= max_k`, `n` in `ns` and odd
/// `m < 2^(k+4)` where the congruence fails, and the number checked.
pub fn power_identity_failures(max_k: u32, ns: &[u64]) -> Result<(usize, usize)> {
    let mut failures = 0;
    let mut checked = 0;
    for k in 0..=max_k {
        for &n in ns {
            for m in (1..(1i64 << (k + 4))).step_by(2) {
                checked += 1;
                if !verify_power_identity(k, n, m)? {
                    failures += 1;
                }
            }
        }
    }
    Ok((failures, checked))
}

pub fn verification_suite(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let odd_ns = [5, 7, 9, 11];
    let (f, p, n) = min_p1_fidelity(&[3, 5, 7], &odd_ns)?;
    checks.push(Check {
        name: "single-layer exact preparation, odd p".into(),
        passed: f >= 1.0 - FIDELITY_TOL,
        detail: format!("min fidelity {f:.16} at p={p}, N={n}"),
    });

    let ns: Vec<u32> = (5..=15).step_by(2).collect();
    let (f, p, n) = min_p1_fidelity(&[2, 4, 6, 8], &ns)?;
    checks.push(Check {
        name: "single-layer exact preparation, even p".into(),
        passed: f >= 1.0 - FIDELITY_TOL,
        detail: format!("min fidelity {f:.16} at p={p}, N={n}"),
    });

    let mut worst: f64 = 0.0;
    for p in 2..=8 {
        for &n in &ns {
            let Some((gamma, beta)) = exact_p1_params(p, n)? else { continue };
            let model = QaoaModel::new(ProblemSpec::new(n, p, 0.0)?)?;
            let sim = model.evaluate(&QaoaParams::single(gamma, beta))?.fidelity;
            let closed = p1_fidelity_closed_form(p, n, gamma)?;
            worst = worst.max((sim - closed).abs());
        }
    }
    checks.push(Check {
        name: "closed-form fidelity matches simulation".into(),
        passed: worst <= FIDELITY_TOL,
        detail: format!("max difference {worst:e}"),
    });

    let v = max_symmetry_violation(100, seed)?;
    checks.push(Check {
        name: "landscape symmetries preserve the energy".into(),
        passed: v <= ENERGY_TOL,
        detail: format!("max |dE| {v:e} over 100 random circuits"),
    });

    let (failures, checked) = power_identity_failures(6, &[0, 4, 8])?;
    checks.push(Check {
        name: "power congruence for n = 0 (mod 4)".into(),
        passed: failures == 0,
        detail: format!("{failures} failures in {checked} cases"),
    });

    Ok(checks)
}
