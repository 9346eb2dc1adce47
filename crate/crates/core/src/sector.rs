//! The maximum-spin (S = N/2) sector of N spins-1/2.
//!
//! Basis states are labelled by `k`, the number of down spins, with
//! magnetization `M_k = N - 2k`. Both collective operators of the model are
//! tridiagonal here: `Sum sigma^z` is diagonal and `Sum sigma^x` couples
//! neighbouring `k`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tridiag::{SymTridiagonal, TridiagonalEigen};

/// Largest system size accepted. The sector is tiny but the dense mixer is
/// `O(N^2)` per layer and plus-state amplitudes are only checked up to here.
pub const MAX_SITES: u32 = 1 << 16;

/// The target Hamiltonian `-(Sum sigma^z)^p / N^(p-1) - h Sum sigma^x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n_sites: u32,
    pub p_exponent: u32,
    pub field: f64,
}

impl ProblemSpec {
    pub fn new(n_sites: u32, p_exponent: u32, field: f64) -> Result<Self> {
        let spec = Self { n_sites, p_exponent, field };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 || self.n_sites > MAX_SITES {
            return Err(Error::InvalidProblem(format!(
                "number of sites must be in 1..={MAX_SITES}, got {}",
                self.n_sites
            )));
        }
        if self.p_exponent < 2 {
            return Err(Error::InvalidProblem(format!(
                "interaction exponent p must be >= 2, got {}",
                self.p_exponent
            )));
        }
        if !(self.field.is_finite() && self.field >= 0.0) {
            return Err(Error::InvalidProblem(format!(
                "transverse field must be finite and >= 0, got {}",
                self.field
            )));
        }
        Ok(())
    }

    pub fn p_is_even(&self) -> bool {
        self.p_exponent % 2 == 0
    }

    pub fn n_is_even(&self) -> bool {
        self.n_sites % 2 == 0
    }

    /// `N^(p-1)`, the extensive normalisation of the interaction.
    pub fn interaction_scale(&self) -> f64 {
        (self.n_sites as f64).powi(self.p_exponent as i32 - 1)
    }

    /// Critical depth: `N/2 + 2` for even p, `N + 1` for odd p.
    pub fn critical_depth(&self) -> usize {
        if self.p_is_even() {
            self.n_sites as usize / 2 + 2
        } else {
            self.n_sites as usize + 1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricBasis {
    n_sites: u32,
    magnetizations: Vec<i64>,
}

impl SymmetricBasis {
    pub fn new(n_sites: u32) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::InvalidProblem(format!(
                "number of sites must be in 1..={MAX_SITES}, got {n_sites}"
            )));
        }
        let n = n_sites as i64;
        let magnetizations = (0..=n).map(|k| n - 2 * k).collect();
        Ok(Self { n_sites, magnetizations })
    }

    pub fn n_sites(&self) -> u32 {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.n_sites as usize + 1
    }

    pub fn magnetizations(&self) -> &[i64] {
        &self.magnetizations
    }

    pub fn magnetization(&self, k: usize) -> i64 {
        self.magnetizations[k]
    }
}

/// Unit-norm amplitudes over the symmetric basis, indexed by `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub const NORM_TOLERANCE: f64 = 1e-10;

    /// Wraps `amplitudes`, rejecting vectors whose norm is not 1.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParams("empty state vector".into()));
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::InvalidParams(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm(&amplitudes);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParams("cannot normalise a zero or non-finite vector".into()));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// The basis vector `e_k`.
    pub fn basis_vector(dim: usize, k: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn build_basis(n_sites: u32) -> Result<SymmetricBasis> {
    SymmetricBasis::new(n_sites)
}

/// `ln C(N, k) - N ln 2` for `k = 0..=N`, by accumulating logarithms of the
/// binomial ratios `C(N,k)/C(N,k-1) = (N-k+1)/k` from both ends so the result
/// is exactly symmetric under `k -> N - k`.
fn log_binomial_weights(n: usize) -> Vec<f64> {
    let mut logs = vec![0.0; n + 1];
    let half = n / 2;
    let mut acc = 0.0;
    for k in 1..=half {
        acc += ((n - k + 1) as f64 / k as f64).ln();
        logs[k] = acc;
    }
    for k in half + 1..=n {
        logs[k] = logs[n - k];
    }
    let shift = n as f64 * std::f64::consts::LN_2;
    logs.iter_mut().for_each(|l| *l -= shift);
    logs
}

/// `|+>^N` projected on the Dicke basis: amplitude `sqrt(C(N,k) / 2^N)`.
pub fn plus_state(basis: &SymmetricBasis) -> StateVector {
    let n = basis.n_sites() as usize;
    let mut amps: Vec<f64> = log_binomial_weights(n).into_iter().map(|l| (0.5 * l).exp()).collect();
    // accumulated log error is ~1e-13 at N ~ 1000; renormalise
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_raw(amps.into_iter().map(|a| Complex64::new(a, 0.0)).collect())
}

/// `Sum_j sigma^x_j` in the Dicke basis: zero diagonal, `sqrt((k+1)(N-k))`
/// between `k` and `k+1`.
pub fn collective_x_matrix(basis: &SymmetricBasis) -> SymTridiagonal {
    let n = basis.n_sites() as f64;
    let off = (0..basis.n_sites() as usize)
        .map(|k| {
            let k = k as f64;
            ((k + 1.0) * (n - k)).sqrt()
        })
        .collect();
    SymTridiagonal::new(vec![0.0; basis.dim()], off).expect("valid tridiagonal shape")
}

/// Exact `|m|^p` in 128 bits.
pub fn checked_power(m: i64, p: u32) -> Result<i128> {
    (m as i128).checked_pow(p).ok_or(Error::PowerOverflow { base: m, exponent: p })
}

/// Diagonal of `H_z = -(Sum sigma^z)^p`: entry `k` is `-(M_k)^p`.
pub fn hz_diagonal(basis: &SymmetricBasis, p: u32) -> Result<Vec<i128>> {
    if p < 2 {
        return Err(Error::InvalidProblem(format!("p must be >= 2, got {p}")));
    }
    basis
        .magnetizations()
        .iter()
        .map(|&m| checked_power(m, p).map(|v| -v))
        .collect()
}

/// `-(M/N)^p * N`, which equals `-M^p / N^(p-1)` without forming either power.
pub(crate) fn interaction_diagonal(basis: &SymmetricBasis, p: u32) -> Vec<f64> {
    let n = basis.n_sites() as f64;
    basis
        .magnetizations()
        .iter()
        .map(|&m| -((m as f64 / n).powi(p as i32)) * n)
        .collect()
}

pub fn target_matrix(spec: &ProblemSpec, basis: &SymmetricBasis, xmat: &SymTridiagonal) -> Result<SymTridiagonal> {
    if basis.n_sites() != spec.n_sites {
        return Err(Error::DimensionMismatch { expected: spec.n_sites as usize + 1, found: basis.dim() });
    }
    if xmat.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: xmat.dim() });
    }
    let diag = interaction_diagonal(basis, spec.p_exponent);
    let off = xmat.off().iter().map(|&x| -spec.field * x).collect();
    SymTridiagonal::new(diag, off)
}

/// Spectral decomposition of `Sum sigma^x`, shared by every mixer layer.
///
/// Eigenvalues are snapped onto the exact integers `-N, -N+2, .., N` once the
/// solver result has been checked against them, so `exp(i beta lambda)` has
/// exactly the periodicity of the true operator.
#[derive(Debug, Clone)]
pub struct XSpectralDecomposition {
    n_sites: u32,
    eigenvalues: Vec<f64>,
    vectors: Vec<f64>,
}

impl XSpectralDecomposition {
    pub fn compute(basis: &SymmetricBasis) -> Result<Self> {
        let xmat = collective_x_matrix(basis);
        let TridiagonalEigen { values, vectors, .. } = xmat.eigen()?;
        let n = basis.n_sites() as i64;
        let tolerance = 1e-8 * (n as f64).max(1.0);
        let mut eigenvalues = Vec::with_capacity(values.len());
        for (j, v) in values.iter().enumerate() {
            let exact = (-n + 2 * j as i64) as f64;
            if (v - exact).abs() > tolerance {
                return Err(Error::EigenNoConvergence { index: j, iterations: 0 });
            }
            eigenvalues.push(exact);
        }
        Ok(Self { n_sites: basis.n_sites(), eigenvalues, vectors })
    }

    pub fn n_sites(&self) -> u32 {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Row-major `V`, eigenvectors as columns.
    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    #[inline]
    pub fn vector_entry(&self, row: usize, col: usize) -> f64 {
        self.vectors[row * self.dim() + col]
    }
}

static X_CACHE: OnceLock<Mutex<HashMap<u32, Arc<XSpectralDecomposition>>>> = OnceLock::new();

/// Process-wide cache of `Sum sigma^x` decompositions keyed on N.
pub fn cached_x_decomposition(n_sites: u32) -> Result<Arc<XSpectralDecomposition>> {
    let cache = X_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("x-decomposition cache poisoned").get(&n_sites) {
        return Ok(Arc::clone(hit));
    }
    // computed outside the lock; a racing worker may duplicate the work once
    let fresh = Arc::new(XSpectralDecomposition::compute(&SymmetricBasis::new(n_sites)?)?);
    let mut guard = cache.lock().expect("x-decomposition cache poisoned");
    Ok(Arc::clone(guard.entry(n_sites).or_insert(fresh)))
}

#[derive(Debug, Clone)]
pub struct TargetSpectrum {
    pub e_min: f64,
    pub e_max: f64,
    /// `E_1 - E_0` over the whole sector.
    pub spectral_gap: f64,
    /// Gap above the ground state within its spin-flip parity sector (even p);
    /// identical to `spectral_gap` for odd p. This is the gap seen by any
    /// parity-preserving evolution from `|+>`.
    pub parity_gap: f64,
    pub eigenvalues: Vec<f64>,
    pub ground_state: StateVector,
}

/// Even/odd blocks of a spin-flip symmetric tridiagonal matrix.
///
/// Requires `diag[k] == diag[N-k]` and `off[k] == off[N-1-k]`, true for the
/// target matrix whenever p is even. The even block uses the basis
/// `(e_k + e_{N-k})/sqrt2` for `k < N/2`, plus `e_{N/2}` for even N.
pub(crate) fn parity_blocks(t: &SymTridiagonal) -> (SymTridiagonal, Option<SymTridiagonal>) {
    let d = t.diag();
    let e = t.off();
    let n = d.len() - 1;
    if n == 0 {
        return (t.clone(), None);
    }
    let pairs = (n + 1) / 2;
    let mut even_d: Vec<f64> = d[..pairs].to_vec();
    let mut even_e: Vec<f64> = e[..pairs.saturating_sub(1)].to_vec();
    let mut odd_d = even_d.clone();
    let odd_e = even_e.clone();
    if n % 2 == 1 {
        // middle pair (K, K+1) couples to itself through off[K]
        let k = pairs - 1;
        even_d[k] += e[k];
        odd_d[k] -= e[k];
    } else {
        // e_{N/2} joins the even block, coupled to the last pair by sqrt2 * off[K]
        let k = pairs - 1;
        even_d.push(d[n / 2]);
        even_e.push(std::f64::consts::SQRT_2 * e[k]);
    }
    let even = SymTridiagonal::new(even_d, even_e).expect("consistent block shape");
    let odd = SymTridiagonal::new(odd_d, odd_e).expect("consistent block shape");
    (even, Some(odd))
}

fn lift_even_block(block_vec: &[f64], n: usize) -> Vec<f64> {
    let mut full = vec![0.0; n + 1];
    let pairs = (n + 1) / 2;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..pairs {
        full[k] = block_vec[k] * r;
        full[n - k] = block_vec[k] * r;
    }
    if n % 2 == 0 {
        full[n / 2] = block_vec[pairs];
    }
    full
}

fn fix_global_phase(mut v: Vec<f64>) -> Vec<f64> {
    let (_, &pivot) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
        .expect("non-empty vector");
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Full diagonalisation of the target Hamiltonian within the sector.
///
/// For even p the ground state is taken from the parity-even block, so for
/// `h = 0` it is exactly the cat state `(e_0 + e_N)/sqrt2` rather than an
/// arbitrary vector in the degenerate pair.
pub fn diagonalize_target(spec: &ProblemSpec) -> Result<TargetSpectrum> {
    spec.validate()?;
    let basis = SymmetricBasis::new(spec.n_sites)?;
    let xmat = collective_x_matrix(&basis);
    let target = target_matrix(spec, &basis, &xmat)?;
    let n = spec.n_sites as usize;

    let full = target.eigen()?;
    let eigenvalues = full.values.clone();
    let e_min = eigenvalues[0];
    let e_max = *eigenvalues.last().expect("non-empty spectrum");
    let spectral_gap = if eigenvalues.len() > 1 { eigenvalues[1] - eigenvalues[0] } else { 0.0 };

    let (ground, parity_gap) = if spec.p_is_even() && n >= 1 {
        let (even, _) = parity_blocks(&target);
        let block = even.eigen()?;
        let gap = if block.values.len() > 1 { block.values[1] - block.values[0] } else { f64::INFINITY };
        (lift_even_block(&block.column(0), n), gap)
    } else {
        (full.column(0), spectral_gap)
    };
    let ground = fix_global_phase(ground);
    let ground_state = StateVector::normalized(ground.into_iter().map(|x| Complex64::new(x, 0.0)).collect())?;

    Ok(TargetSpectrum { e_min, e_max, spectral_gap, parity_gap, eigenvalues, ground_state })
}

/// Parity-resolved gap above the ground state, eigenvalues only.
pub fn parity_gap(spec: &ProblemSpec) -> Result<f64> {
    spec.validate()?;
    let basis = SymmetricBasis::new(spec.n_sites)?;
    let target = target_matrix(spec, &basis, &collective_x_matrix(&basis))?;
    let block = if spec.p_is_even() { parity_blocks(&target).0 } else { target };
    if block.dim() < 2 {
        return Ok(f64::INFINITY);
    }
    Ok(block.kth_eigenvalue(1) - block.kth_eigenvalue(0))
}
