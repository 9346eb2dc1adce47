//! Closed-form single-layer solutions at `h = 0` and the symmetries of the
//! energy landscape in parameter space.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::QaoaParams;
use crate::error::{Error, Result};
use crate::phase::PowerResidue;

/// Parity class of an odd magnetization: 0 for `M = +-1 (mod 8)`, 1 for
/// `M = +-3 (mod 8)`.
pub fn f_of_m(m: i64) -> Result<u8> {
    if m % 2 == 0 {
        return Err(Error::NotOdd("magnetization"));
    }
    Ok(match m.rem_euclid(8) {
        1 | 7 => 0,
        _ => 1,
    })
}

/// `p = 2^(k+1) + n 2^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvenPDecomposition {
    pub k: u32,
    pub n: u64,
}

impl EvenPDecomposition {
    pub fn exponent(&self) -> u128 {
        (1u128 << (self.k + 1)) + self.n as u128 * (1u128 << self.k)
    }

    /// The exact single-layer angle `2 pi / 2^(k+4)`.
    pub fn gamma(&self) -> f64 {
        TAU / 2f64.powi(self.k as i32 + 4)
    }

    /// Whether the power congruence holds for every odd `m`, i.e. `4 | n`.
    pub fn is_exact(&self) -> bool {
        self.n % 4 == 0
    }
}

/// Every `(k, n)` with `2^(k+1) + n 2^k = p`, in increasing `k`.
pub fn all_even_p_decompositions(p: u32) -> Result<Vec<EvenPDecomposition>> {
    if p % 2 != 0 || p < 2 {
        return Err(Error::NotEven("p (and >= 2)"));
    }
    let p = p as u64;
    let mut out = Vec::new();
    let mut k = 0u32;
    while (1u64 << (k + 1)) <= p {
        let unit = 1u64 << k;
        if p % unit == 0 {
            out.push(EvenPDecomposition { k, n: (p - 2 * unit) / unit });
        }
        k += 1;
    }
    Ok(out)
}

/// The decomposition with the largest `k` (smallest angle). Only exact when
/// `p` is a power of two; see [`even_p_decomposition`].
pub fn maximal_even_p_decomposition(p: u32) -> Result<EvenPDecomposition> {
    all_even_p_decompositions(p)?
        .pop()
        .ok_or(Error::NotEven("p (and >= 2)"))
}

/// The decomposition whose angle prepares the target exactly: `k = v - 1`
/// where `2^v` is the largest power of two dividing `p`, so that `n = 0 (mod 4)`.
///
/// The power congruence `m^p = f(m) 2^(k+3) + 1 (mod 2^(k+4))` holds for
/// every odd `m` only when `4 | n`; other splittings of the same `p` give
/// `m^p = 1` or an odd power of `m^(2^k)` instead.
pub fn even_p_decomposition(p: u32) -> Result<EvenPDecomposition> {
    if p % 2 != 0 || p < 2 {
        return Err(Error::NotEven("p (and >= 2)"));
    }
    let k = p.trailing_zeros() - 1;
    let n = (p as u64 >> k) - 2;
    Ok(EvenPDecomposition { k, n })
}

/// Exact `P = 1` angles `(gamma, beta)` preparing the `h = 0` ground state,
/// known for odd N only.
pub fn exact_p1_params(p: u32, n_sites: u32) -> Result<Option<(f64, f64)>> {
    if p < 2 || n_sites == 0 {
        return Err(Error::InvalidProblem(format!("need p >= 2 and N >= 1, got p={p}, N={n_sites}")));
    }
    if n_sites % 2 == 0 {
        return Ok(None);
    }
    if p % 2 == 1 {
        return Ok(Some((FRAC_PI_4, FRAC_PI_4)));
    }
    Ok(Some((even_p_decomposition(p)?.gamma(), FRAC_PI_4)))
}

fn mul_mod(a: u128, b: u128, modulus: u128) -> u128 {
    (a * b) % modulus
}

/// `base^exp mod modulus` for `modulus <= 2^64`.
pub fn mod_pow(base: u128, mut exp: u128, modulus: u128) -> u128 {
    assert!(modulus > 0 && modulus <= 1u128 << 64, "modulus out of range");
    if modulus == 1 {
        return 0;
    }
    let mut result = 1u128;
    let mut b = base % modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, b, modulus);
        }
        b = mul_mod(b, b, modulus);
        exp >>= 1;
    }
    result
}

/// Checks `m^(2^(k+1) + n 2^k) mod 2^(k+4) == f(m) 2^(k+3) + 1`.
pub fn verify_power_identity(k: u32, n: u64, m: i64) -> Result<bool> {
    if m % 2 == 0 {
        return Err(Error::NotOdd("m"));
    }
    if k + 4 > 64 {
        return Err(Error::InvalidParams(format!("k = {k} exceeds the 64-bit modulus range")));
    }
    let modulus = 1u128 << (k + 4);
    let exponent = EvenPDecomposition { k, n }.exponent();
    let base = (m as i128).rem_euclid(modulus as i128) as u128;
    let lhs = mod_pow(base, exponent, modulus);
    let rhs = f_of_m(m)? as u128 * (1u128 << (k + 3)) + 1;
    Ok(lhs == rhs)
}

/// `C(N,k) / 2^N` for `k = 0..=N`.
fn binomial_weights(n: u32) -> Vec<f64> {
    let n = n as usize;
    let mut logs = vec![0.0f64; n + 1];
    for k in 1..=n {
        logs[k] = logs[k - 1] + ((n - k + 1) as f64).ln() - (k as f64).ln();
    }
    let shift = n as f64 * std::f64::consts::LN_2;
    logs.into_iter().map(|l| (l - shift).exp()).collect()
}

/// Single-layer fidelity at `beta = pi/4` and `h = 0` from the
/// magnetization-resolved sum, without building any state.
///
/// Odd p: `|2^-N Sum_k C(N,k) exp(i gamma M^p) i^k|^2`.
/// Even p (odd N): `|2^-N Sum_k C(N,k) exp(i (gamma M^p - pi f(M)))|^2`.
pub fn p1_fidelity_closed_form(p: u32, n_sites: u32, gamma: f64) -> Result<f64> {
    if p < 2 || n_sites == 0 {
        return Err(Error::InvalidProblem(format!("need p >= 2 and N >= 1, got p={p}, N={n_sites}")));
    }
    let even_p = p % 2 == 0;
    if even_p && n_sites % 2 == 0 {
        return Err(Error::NotOdd("N (for even p)"));
    }
    let weights = binomial_weights(n_sites);
    let t = gamma / TAU;
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, w) in weights.iter().enumerate() {
        let m = n_sites as i64 - 2 * k as i64;
        let mut turns = PowerResidue::new(m, p).turns(t);
        if even_p {
            turns -= 0.5 * f_of_m(m)? as f64;
        } else {
            turns += 0.25 * (k % 4) as f64;
        }
        sum += Complex64::from_polar(*w, TAU * turns);
    }
    Ok(sum.norm_sqr())
}

/// One row of the landscape symmetry table, acting on a single component
/// where applicable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SymmetryTransform {
    /// `(gamma, beta) -> -(gamma, beta)`
    NegateAll,
    BetaShift { shift: f64, component: usize },
    GammaShift { shift: f64, component: usize },
}

impl SymmetryTransform {
    pub fn apply(&self, params: &QaoaParams) -> QaoaParams {
        match *self {
            SymmetryTransform::NegateAll => params.negated(),
            SymmetryTransform::BetaShift { shift, component } => {
                let mut out = params.clone();
                out.betas_mut()[component % params.depth()] += shift;
                out
            }
            SymmetryTransform::GammaShift { shift, component } => {
                let mut out = params.clone();
                out.gammas_mut()[component % params.depth()] += shift;
                out
            }
        }
    }

    pub fn with_component(self, component: usize) -> Self {
        match self {
            SymmetryTransform::NegateAll => self,
            SymmetryTransform::BetaShift { shift, .. } => SymmetryTransform::BetaShift { shift, component },
            SymmetryTransform::GammaShift { shift, .. } => SymmetryTransform::GammaShift { shift, component },
        }
    }
}

/// Period of every `beta_m`: `pi` for odd p, `pi/2` for even p.
pub fn beta_period(p: u32) -> f64 {
    if p % 2 == 0 { FRAC_PI_2 } else { PI }
}

/// Period of every `gamma_m`: `pi` for odd N, `pi / 2^(p-1)` for even N.
pub fn gamma_period(p: u32, n_sites: u32) -> f64 {
    if n_sites % 2 == 1 { PI } else { PI / 2f64.powi(p as i32 - 1) }
}

/// The generators of the symmetry table for `(p, N)`, shifts acting on
/// component 0. Use [`SymmetryTransform::with_component`] or
/// [`symmetry_transforms`] for the other components.
pub fn symmetry_group(p: u32, n_sites: u32) -> Vec<SymmetryTransform> {
    vec![
        SymmetryTransform::NegateAll,
        SymmetryTransform::BetaShift { shift: beta_period(p), component: 0 },
        SymmetryTransform::GammaShift { shift: gamma_period(p, n_sites), component: 0 },
    ]
}

/// All transforms for a depth-`depth` circuit: negation plus a beta and a
/// gamma shift on every component.
pub fn symmetry_transforms(p: u32, n_sites: u32, depth: usize) -> Vec<SymmetryTransform> {
    let generators = symmetry_group(p, n_sites);
    let mut out = vec![SymmetryTransform::NegateAll];
    for component in 0..depth {
        out.extend(generators[1..].iter().map(|g| g.with_component(component)));
    }
    out
}

/// Folds every angle into `[0, period)` of its own symmetry.
pub fn canonicalize(params: &QaoaParams, p: u32, n_sites: u32) -> QaoaParams {
    let gp = gamma_period(p, n_sites);
    let bp = beta_period(p);
    let fold = |x: f64, period: f64| {
        let r = x.rem_euclid(period);
        if r >= period { 0.0 } else { r }
    };
    let gammas = params.gammas().iter().map(|&g| fold(g, gp)).collect();
    let betas = params.betas().iter().map(|&b| fold(b, bp)).collect();
    QaoaParams::new(gammas, betas).expect("folding preserves shape and finiteness")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_examples() {
        assert_eq!(f_of_m(1).unwrap(), 0);
        assert_eq!(f_of_m(-3).unwrap(), 1);
        assert_eq!(f_of_m(15).unwrap(), 0);
        assert_eq!(f_of_m(5).unwrap(), 1);
        assert_eq!(f_of_m(-1).unwrap(), 0);
        assert!(f_of_m(4).is_err());
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(even_p_decomposition(2).unwrap(), EvenPDecomposition { k: 0, n: 0 });
        assert_eq!(even_p_decomposition(4).unwrap(), EvenPDecomposition { k: 1, n: 0 });
        assert_eq!(even_p_decomposition(6).unwrap(), EvenPDecomposition { k: 0, n: 4 });
        assert_eq!(maximal_even_p_decomposition(6).unwrap(), EvenPDecomposition { k: 1, n: 1 });
        assert_eq!(even_p_decomposition(12).unwrap(), EvenPDecomposition { k: 1, n: 4 });
        assert_eq!(even_p_decomposition(16).unwrap(), maximal_even_p_decomposition(16).unwrap());
        assert_eq!(
            all_even_p_decompositions(6).unwrap(),
            vec![EvenPDecomposition { k: 0, n: 4 }, EvenPDecomposition { k: 1, n: 1 }]
        );
        assert!(even_p_decomposition(3).is_err());
        assert!(even_p_decomposition(0).is_err());
    }

    #[test]
    fn decompositions_reconstruct_p() {
        for p in (2..=64).step_by(2) {
            for d in all_even_p_decompositions(p).unwrap() {
                assert_eq!(d.exponent(), p as u128);
            }
            let exact = even_p_decomposition(p).unwrap();
            assert_eq!(exact.exponent(), p as u128);
            assert!(exact.is_exact());
            assert_eq!(all_even_p_decompositions(p).unwrap().iter().filter(|d| d.is_exact()).count(), 1);
        }
    }

    #[test]
    fn exact_params_examples() {
        assert_eq!(exact_p1_params(3, 7).unwrap(), Some((FRAC_PI_4, FRAC_PI_4)));
        assert_eq!(exact_p1_params(2, 5).unwrap(), Some((PI / 8.0, FRAC_PI_4)));
        assert_eq!(exact_p1_params(4, 4).unwrap(), None);
    }

    #[test]
    fn identity_examples() {
        assert!(verify_power_identity(0, 0, 3).unwrap());
        assert!(verify_power_identity(1, 0, 5).unwrap());
        assert!(verify_power_identity(0, 0, 1).unwrap());
        assert!(verify_power_identity(2, 8, -7).unwrap());
        // 3^4 = 81 = 1 (mod 16), not 9: the congruence needs 4 | n
        assert!(!verify_power_identity(0, 2, 3).unwrap());
        assert!(!verify_power_identity(2, 3, -7).unwrap());
        assert!(verify_power_identity(0, 0, 2).is_err());
    }

    #[test]
    fn mod_pow_small() {
        assert_eq!(mod_pow(3, 2, 16), 9);
        assert_eq!(mod_pow(5, 4, 32), 17);
        assert_eq!(mod_pow(7, 0, 32), 1);
        // (2^64 - 1)^3 = (-1)^3 (mod 2^64)
        assert_eq!(mod_pow(u64::MAX as u128, 3, 1 << 64), u64::MAX as u128);
    }

    #[test]
    fn closed_form_fidelity_examples() {
        assert!((p1_fidelity_closed_form(3, 5, FRAC_PI_4).unwrap() - 1.0).abs() < 1e-12);
        assert!((p1_fidelity_closed_form(2, 5, PI / 8.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(p1_fidelity_closed_form(2, 4, PI / 8.0).is_err());
    }

    #[test]
    fn symmetry_group_examples() {
        assert_eq!(
            symmetry_group(3, 5),
            vec![
                SymmetryTransform::NegateAll,
                SymmetryTransform::BetaShift { shift: PI, component: 0 },
                SymmetryTransform::GammaShift { shift: PI, component: 0 },
            ]
        );
        assert_eq!(
            symmetry_group(2, 4),
            vec![
                SymmetryTransform::NegateAll,
                SymmetryTransform::BetaShift { shift: FRAC_PI_2, component: 0 },
                SymmetryTransform::GammaShift { shift: FRAC_PI_2, component: 0 },
            ]
        );
        assert_eq!(symmetry_transforms(3, 4, 3).len(), 7);
    }

    #[test]
    fn canonicalize_examples() {
        let c = canonicalize(&QaoaParams::single(PI + 0.3, 0.1), 3, 5);
        assert!((c.gammas()[0] - 0.3).abs() < 1e-15);
        let c = canonicalize(&QaoaParams::single(0.1, -0.2), 2, 5);
        assert!((c.betas()[0] - (FRAC_PI_2 - 0.2)).abs() < 1e-15);
        let c = canonicalize(&QaoaParams::single(0.1, FRAC_PI_2 + 0.3), 2, 5);
        assert!((c.betas()[0] - 0.3).abs() < 1e-15);
    }
}
