//! QAOA circuit evaluation in the symmetric sector.
//!
//! The ansatz applies, for `m = 1..P`, the phase layer `exp(-i gamma_m H_z)`
//! followed by the mixer `exp(-i beta_m H_x)` to `|+>`, with
//! `H_z = -(Sum sigma^z)^p` and `H_x = -Sum sigma^x`. Energies are measured
//! against the target Hamiltonian of the [`ProblemSpec`].

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::PowerResidue;
use crate::sector::{
    self, cached_x_decomposition, collective_x_matrix, diagonalize_target, plus_state, target_matrix,
    ProblemSpec, StateVector, SymmetricBasis, TargetSpectrum, XSpectralDecomposition,
};
use crate::tridiag::SymTridiagonal;

/// Circuit angles `(gamma_1..gamma_P, beta_1..beta_P)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::InvalidParams(format!(
                "{} gammas but {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        if gammas.is_empty() {
            return Err(Error::InvalidParams("depth P must be >= 1".into()));
        }
        if gammas.iter().chain(&betas).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("angles must be finite".into()));
        }
        Ok(Self { gammas, betas })
    }

    pub fn single(gamma: f64, beta: f64) -> Self {
        Self { gammas: vec![gamma], betas: vec![beta] }
    }

    pub fn zeros(depth: usize) -> Result<Self> {
        Self::new(vec![0.0; depth], vec![0.0; depth])
    }

    /// Splits a flat `[gammas.., betas..]` vector.
    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.len() % 2 != 0 {
            return Err(Error::InvalidParams(format!("flat parameter vector has odd length {}", x.len())));
        }
        let depth = x.len() / 2;
        Self::new(x[..depth].to_vec(), x[depth..].to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn gammas_mut(&mut self) -> &mut [f64] {
        &mut self.gammas
    }

    pub fn betas_mut(&mut self) -> &mut [f64] {
        &mut self.betas
    }

    pub fn negated(&self) -> Self {
        Self {
            gammas: self.gammas.iter().map(|g| -g).collect(),
            betas: self.betas.iter().map(|b| -b).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub energy: f64,
    pub residual: f64,
    pub fidelity: f64,
    pub annealing_time: f64,
}

/// Multiplies amplitude `k` by `exp(-i gamma hz_k)`.
pub fn apply_phase_layer(state: &StateVector, gamma: f64, hz: &[i128]) -> Result<StateVector> {
    if hz.len() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: hz.len() });
    }
    let mut amps = state.amplitudes().to_vec();
    // exp(-i gamma hz) = exp(i gamma (-hz))
    let residues: Vec<PowerResidue> = hz.iter().map(|&v| PowerResidue::from_i128(-v)).collect();
    phase_in_place(&mut amps, gamma, &residues);
    Ok(StateVector::from_raw(amps))
}

/// `V diag(exp(i beta lambda)) V^T state`, i.e. `exp(-i beta H_x)`.
pub fn apply_mixer_layer(state: &StateVector, beta: f64, xdec: &XSpectralDecomposition) -> Result<StateVector> {
    if xdec.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: xdec.dim() });
    }
    let mut amps = state.amplitudes().to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); amps.len()];
    mixer_in_place(&mut amps, beta, xdec, &mut scratch);
    Ok(StateVector::from_raw(amps))
}

fn phase_in_place(amps: &mut [Complex64], gamma: f64, generator: &[PowerResidue]) {
    if gamma == 0.0 {
        return;
    }
    let t = gamma / TAU;
    for (a, r) in amps.iter_mut().zip(generator) {
        let theta = TAU * r.turns(t);
        *a *= Complex64::from_polar(1.0, theta);
    }
}

fn mixer_in_place(amps: &mut [Complex64], beta: f64, xdec: &XSpectralDecomposition, coeffs: &mut [Complex64]) {
    if beta == 0.0 {
        return;
    }
    let n = amps.len();
    let v = xdec.vectors();
    coeffs.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
    for (k, &a) in amps.iter().enumerate() {
        let row = &v[k * n..(k + 1) * n];
        for (c, &vkj) in coeffs.iter_mut().zip(row) {
            *c += a * vkj;
        }
    }
    for (c, &lambda) in coeffs.iter_mut().zip(xdec.eigenvalues()) {
        *c *= Complex64::from_polar(1.0, (beta * lambda).rem_euclid(TAU));
    }
    for (k, a) in amps.iter_mut().enumerate() {
        let row = &v[k * n..(k + 1) * n];
        *a = row.iter().zip(coeffs.iter()).map(|(&vkj, &c)| c * vkj).sum();
    }
}

/// A problem instance with every parameter-independent piece precomputed.
///
/// Cheap to share: the mixer decomposition sits behind an `Arc` taken from the
/// process-wide cache.
#[derive(Debug, Clone)]
pub struct QaoaModel {
    spec: ProblemSpec,
    basis: SymmetricBasis,
    xmat: SymTridiagonal,
    xdec: Arc<XSpectralDecomposition>,
    target: SymTridiagonal,
    /// Eigenvalues of `-H_z = (Sum sigma^z)^p`.
    generator: Vec<PowerResidue>,
    generator_f64: Vec<f64>,
    initial: StateVector,
    spectrum: TargetSpectrum,
}

impl QaoaModel {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let basis = SymmetricBasis::new(spec.n_sites)?;
        let xmat = collective_x_matrix(&basis);
        let xdec = cached_x_decomposition(spec.n_sites)?;
        let target = target_matrix(&spec, &basis, &xmat)?;
        let generator: Vec<PowerResidue> =
            basis.magnetizations().iter().map(|&m| PowerResidue::new(m, spec.p_exponent)).collect();
        let generator_f64 = generator.iter().map(PowerResidue::approx).collect();
        let initial = plus_state(&basis);
        let spectrum = diagonalize_target(&spec)?;
        Ok(Self { spec, basis, xmat, xdec, target, generator, generator_f64, initial, spectrum })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn basis(&self) -> &SymmetricBasis {
        &self.basis
    }

    pub fn spectrum(&self) -> &TargetSpectrum {
        &self.spectrum
    }

    pub fn x_decomposition(&self) -> &XSpectralDecomposition {
        &self.xdec
    }

    pub fn target_matrix(&self) -> &SymTridiagonal {
        &self.target
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial
    }

    pub fn state(&self, params: &QaoaParams) -> StateVector {
        let mut amps = self.initial.amplitudes().to_vec();
        let mut scratch = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (&gamma, &beta) in params.gammas().iter().zip(params.betas()) {
            phase_in_place(&mut amps, gamma, &self.generator);
            mixer_in_place(&mut amps, beta, &self.xdec, &mut scratch);
        }
        StateVector::from_raw(amps)
    }

    fn apply_target(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.target.matvec(x, out);
    }

    /// `<state|H_target|state>`.
    pub fn energy_of(&self, state: &StateVector) -> Result<f64> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: state.dim() });
        }
        let mut h = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_target(state.amplitudes(), &mut h);
        let value = sector::inner(state.amplitudes(), &h);
        let scale = 1.0 + value.re.abs();
        debug_assert!(value.im.abs() < 1e-12 * scale, "imaginary energy residue {}", value.im);
        Ok(value.re)
    }

    pub fn energy(&self, params: &QaoaParams) -> f64 {
        self.energy_of(&self.state(params)).expect("model-generated state has matching dimension")
    }

    /// Energy and its exact gradient in `[d/dgamma.., d/dbeta..]` order.
    ///
    /// One forward sweep builds the final state; the reverse sweep then
    /// un-applies each layer to both the state and the co-state `H|psi>`,
    /// reading off `dE/dtheta = -2 Im <costate| G |state>` at each generator
    /// `G` along the way.
    pub fn energy_and_gradient(&self, params: &QaoaParams) -> (f64, Vec<f64>) {
        let depth = params.depth();
        let n = self.dim();
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        let mut psi = self.state(params).into_amplitudes();
        let mut lambda = vec![Complex64::new(0.0, 0.0); n];
        self.apply_target(&psi, &mut lambda);
        let energy = sector::inner(&psi, &lambda).re;

        let mut grad = vec![0.0; 2 * depth];
        let mut gx = vec![Complex64::new(0.0, 0.0); n];
        for m in (0..depth).rev() {
            let (gamma, beta) = (params.gammas()[m], params.betas()[m]);

            self.xmat.matvec(&psi, &mut gx);
            grad[depth + m] = -2.0 * sector::inner(&lambda, &gx).im;
            mixer_in_place(&mut psi, -beta, &self.xdec, &mut scratch);
            mixer_in_place(&mut lambda, -beta, &self.xdec, &mut scratch);

            let mut acc = 0.0;
            for ((l, p), &g) in lambda.iter().zip(&psi).zip(&self.generator_f64) {
                acc += (l.conj() * p).im * g;
            }
            grad[m] = -2.0 * acc;
            phase_in_place(&mut psi, -gamma, &self.generator);
            phase_in_place(&mut lambda, -gamma, &self.generator);
        }
        (energy, grad)
    }

    pub fn evaluate(&self, params: &QaoaParams) -> Result<EvaluationRecord> {
        let state = self.state(params);
        let energy = self.energy_of(&state)?;
        Ok(EvaluationRecord {
            energy,
            residual: residual_energy(&self.spectrum, energy)?,
            fidelity: fidelity(&state, &self.spectrum.ground_state),
            annealing_time: equivalent_annealing_time(&self.spec, params),
        })
    }
}

/// Prepares the circuit state from scratch; prefer [`QaoaModel::state`] in loops.
pub fn qaoa_state(spec: &ProblemSpec, params: &QaoaParams) -> Result<StateVector> {
    Ok(QaoaModel::new(*spec)?.state(params))
}

pub fn energy(spec: &ProblemSpec, state: &StateVector) -> Result<f64> {
    let basis = SymmetricBasis::new(spec.n_sites)?;
    let target = target_matrix(spec, &basis, &collective_x_matrix(&basis))?;
    if state.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), found: state.dim() });
    }
    let mut h = vec![Complex64::new(0.0, 0.0); target.dim()];
    target.matvec(state.amplitudes(), &mut h);
    Ok(sector::inner(state.amplitudes(), &h).re)
}

pub fn energy_and_gradient(spec: &ProblemSpec, params: &QaoaParams) -> Result<(f64, Vec<f64>)> {
    Ok(QaoaModel::new(*spec)?.energy_and_gradient(params))
}

/// Absolute slack on the spectrum bounds before a residual is rejected.
pub const SPECTRUM_SLACK: f64 = 1e-9;

/// `(E - E_min) / (E_max - E_min)`, clamped into `[0, 1]`.
pub fn residual_energy(spectrum: &TargetSpectrum, energy: f64) -> Result<f64> {
    let width = spectrum.e_max - spectrum.e_min;
    if !(width > 0.0) {
        return Err(Error::DegenerateSpectrum(spectrum.e_min));
    }
    if !(energy >= spectrum.e_min - SPECTRUM_SLACK && energy <= spectrum.e_max + SPECTRUM_SLACK) {
        return Err(Error::EnergyOutsideSpectrum { energy, e_min: spectrum.e_min, e_max: spectrum.e_max });
    }
    Ok(((energy - spectrum.e_min) / width).clamp(0.0, 1.0))
}

/// `|<target|state>|^2`
pub fn fidelity(state: &StateVector, target: &StateVector) -> f64 {
    target.inner(state).norm_sqr()
}

/// `tau / hbar = Sum_m beta_m + (1 - h) gamma_m N^(p-1)`.
pub fn equivalent_annealing_time(spec: &ProblemSpec, params: &QaoaParams) -> f64 {
    let scale = spec.interaction_scale();
    params
        .gammas()
        .iter()
        .zip(params.betas())
        .map(|(g, b)| b + (1.0 - spec.field) * g * scale)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sector::{build_basis, hz_diagonal};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_state(dim: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        StateVector::normalized(amps).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(QaoaParams::new(vec![0.1], vec![0.2, 0.3]).is_err());
        assert!(QaoaParams::new(vec![], vec![]).is_err());
        assert!(QaoaParams::new(vec![f64::NAN], vec![0.0]).is_err());
        let p = QaoaParams::from_flat(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.gammas(), &[1.0, 2.0]);
        assert_eq!(p.betas(), &[3.0, 4.0]);
        assert_eq!(p.to_flat(), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn phase_layer_cases() {
        let basis = build_basis(1).unwrap();
        let hz = hz_diagonal(&basis, 3).unwrap();
        let s = random_state(2, 1);
        assert_eq!(apply_phase_layer(&s, 0.0, &hz).unwrap(), s);

        let out = apply_phase_layer(&s, PI, &hz).unwrap();
        for (a, b) in out.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a + b).norm() < 1e-15);
        }

        let b9 = build_basis(9).unwrap();
        let s9 = random_state(10, 2);
        let out = apply_phase_layer(&s9, 0.3, &hz_diagonal(&b9, 2).unwrap()).unwrap();
        assert!((out.norm() - s9.norm()).abs() < 1e-14);
    }

    #[test]
    fn mixer_layer_cases() {
        for n in [3u32, 4, 9] {
            let basis = build_basis(n).unwrap();
            let xdec = XSpectralDecomposition::compute(&basis).unwrap();
            let s = random_state(basis.dim(), n as u64);
            let same = apply_mixer_layer(&s, 0.0, &xdec).unwrap();
            assert_eq!(same, s);

            let flipped = apply_mixer_layer(&s, PI, &xdec).unwrap();
            assert!((s.inner(&flipped).norm() - 1.0).abs() < 1e-12);
            assert!((flipped.norm() - 1.0).abs() < 1e-12);

            let plus = plus_state(&basis);
            let rotated = apply_mixer_layer(&plus, 0.77, &xdec).unwrap();
            assert!((fidelity(&rotated, &plus) - 1.0).abs() < 1e-12);
            let phase = plus.inner(&rotated);
            let want = Complex64::from_polar(1.0, 0.77 * n as f64);
            assert!((phase - want).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_angles_give_plus_state() {
        let spec = ProblemSpec::new(7, 3, 0.4).unwrap();
        let state = qaoa_state(&spec, &QaoaParams::zeros(3).unwrap()).unwrap();
        assert_eq!(state, plus_state(&build_basis(7).unwrap()));
    }

    #[test]
    fn exact_p1_preparations() {
        let model = QaoaModel::new(ProblemSpec::new(5, 3, 0.0).unwrap()).unwrap();
        let rec = model.evaluate(&QaoaParams::single(PI / 4.0, PI / 4.0)).unwrap();
        assert!((rec.fidelity - 1.0).abs() < 1e-12);
        assert!(rec.residual < 1e-12);

        let model = QaoaModel::new(ProblemSpec::new(5, 2, 0.0).unwrap()).unwrap();
        let rec = model.evaluate(&QaoaParams::single(PI / 8.0, PI / 4.0)).unwrap();
        assert!((rec.fidelity - 1.0).abs() < 1e-12);

        let model = QaoaModel::new(ProblemSpec::new(7, 5, 0.0).unwrap()).unwrap();
        let rec = model.evaluate(&QaoaParams::single(PI / 4.0, PI / 4.0)).unwrap();
        assert!((rec.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_examples() {
        let spec = ProblemSpec::new(8, 3, 0.5).unwrap();
        let plus = plus_state(&build_basis(8).unwrap());
        assert!((energy(&spec, &plus).unwrap() + 4.0).abs() < 1e-12);

        for n in 1..=12u32 {
            let spec = ProblemSpec::new(n, 2, 0.0).unwrap();
            let plus = plus_state(&build_basis(n).unwrap());
            assert!((energy(&spec, &plus).unwrap() + 1.0).abs() < 1e-12, "n={n}");
        }

        let spec = ProblemSpec::new(6, 4, 0.0).unwrap();
        let up = StateVector::basis_vector(7, 0);
        assert!((energy(&spec, &up).unwrap() + 6.0).abs() < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let spectrum = diagonalize_target(&ProblemSpec::new(6, 3, 0.7).unwrap()).unwrap();
        let (lo, hi) = (spectrum.e_min, spectrum.e_max);
        assert_eq!(residual_energy(&spectrum, lo).unwrap(), 0.0);
        assert_eq!(residual_energy(&spectrum, hi).unwrap(), 1.0);
        assert!((residual_energy(&spectrum, 0.5 * (lo + hi)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(residual_energy(&spectrum, lo - 1e-13).unwrap(), 0.0);
        assert!(residual_energy(&spectrum, lo - 1e-6).is_err());
        assert!(residual_energy(&spectrum, hi + 1e-6).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let s = random_state(5, 9);
        assert!((fidelity(&s, &s) - 1.0).abs() < 1e-14);
        let e0 = StateVector::basis_vector(5, 0);
        let e3 = StateVector::basis_vector(5, 3);
        assert_eq!(fidelity(&e0, &e3), 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let spec = ProblemSpec::new(8, 2, 1.0).unwrap();
        let model = QaoaModel::new(spec).unwrap();
        let params = QaoaParams::single(0.3, 0.7);
        let (_, grad) = model.energy_and_gradient(&params);
        let x = params.to_flat();
        for i in 0..x.len() {
            let step = 1e-6;
            let mut up = x.clone();
            let mut dn = x.clone();
            up[i] += step;
            dn[i] -= step;
            let fd = (model.energy(&QaoaParams::from_flat(&up).unwrap())
                - model.energy(&QaoaParams::from_flat(&dn).unwrap()))
                / (2.0 * step);
            assert!(((grad[i] - fd) / fd).abs() < 1e-6, "component {i}: {} vs {fd}", grad[i]);
        }
    }

    #[test]
    fn gradient_vanishes_at_exact_minimum() {
        let model = QaoaModel::new(ProblemSpec::new(5, 3, 0.0).unwrap()).unwrap();
        let (_, grad) = model.energy_and_gradient(&QaoaParams::single(PI / 4.0, PI / 4.0));
        assert!(grad.iter().all(|g| g.abs() < 1e-10), "{grad:?}");
    }

    #[test]
    fn mixer_direction_is_stationary_at_origin() {
        let model = QaoaModel::new(ProblemSpec::new(9, 3, 5.0).unwrap()).unwrap();
        let (_, grad) = model.energy_and_gradient(&QaoaParams::zeros(1).unwrap());
        assert!(grad[1].abs() < 1e-12);
    }

    #[test]
    fn annealing_time_examples() {
        let spec = ProblemSpec::new(5, 3, 0.0).unwrap();
        let t = equivalent_annealing_time(&spec, &QaoaParams::single(PI / 4.0, PI / 4.0));
        assert!((t - PI * 26.0 / 4.0).abs() < 1e-12);

        let spec = ProblemSpec::new(5, 3, 1.0).unwrap();
        let params = QaoaParams::new(vec![0.4, 0.9], vec![0.1, 0.2]).unwrap();
        assert!((equivalent_annealing_time(&spec, &params) - 0.3).abs() < 1e-15);
    }
}
