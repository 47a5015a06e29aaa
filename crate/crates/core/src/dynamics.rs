//! Random-Hamiltonian decoherence of a two-qubit central system.
//!
//! The full space is `env ⊗ q1 ⊗ q2` with amplitude `(e, q1, q2)` at
//! `4e + 2q1 + q2`. Each realization draws a Hamiltonian and a Haar-random
//! environment state, diagonalizes the Hamiltonian once and evolves the state
//! spectrally until the central purity first falls to the target.

use std::f64::consts::FRAC_PI_4;

use nalgebra::SymmetricEigen;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    eigenvalues_sorted, haar_random_state, reduce_amplitudes, sample_gue, CMatrix, CVector, DensityMatrix,
    EigenvalueVector, StateVector, C64,
};
use crate::rng::{substream, AUX_STREAM_BASE};
use crate::samples::SampleSet;

/// Largest purity change allowed across one coarse step.
const MAX_PURITY_STEP: f64 = 0.01;
/// Coarse steps never exceed `t_max / COARSE_STEPS`.
const COARSE_STEPS: f64 = 200.0;
/// Bisection stops once the purity is this close to the target.
const CROSSING_TOL: f64 = 1e-10;
const PILOT_REALIZATIONS: usize = 10;
const PILOT_FACTOR: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// One GUE matrix on the whole space.
    Global,
    /// Environment Hamiltonian plus a weak GUE term on the whole space.
    Coupling,
    /// Only the first qubit couples to the environment.
    Spectator,
    /// Both qubits couple to the environment through separate terms.
    Common,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Global => "global",
            ModelKind::Coupling => "coupling",
            ModelKind::Spectator => "spectator",
            ModelKind::Common => "common",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(ModelKind::Global),
            "coupling" => Ok(ModelKind::Coupling),
            "spectator" => Ok(ModelKind::Spectator),
            "common" => Ok(ModelKind::Common),
            other => Err(Error::invalid(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianModel {
    pub kind: ModelKind,
    /// Environment dimension.
    pub m: usize,
    /// Coupling strength; ignored by the global model.
    pub epsilon: f64,
}

impl HamiltonianModel {
    pub fn new(kind: ModelKind, m: usize, epsilon: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!("environment dimension must be >= 2, got {m}")));
        }
        if kind != ModelKind::Global && !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("coupling strength must be >= 0, got {epsilon}")));
        }
        Ok(Self { kind, m, epsilon })
    }

    pub fn global(m: usize) -> Result<Self> {
        Self::new(ModelKind::Global, m, 0.0)
    }

    pub fn total_dim(&self) -> usize {
        4 * self.m
    }
}

/// Central state `sin θ |00⟩ + cos θ |11⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialStateSpec {
    pub theta: f64,
}

impl InitialStateSpec {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_4 + 1e-12).contains(&theta) {
            return Err(Error::invalid(format!("theta must lie in [0, π/4], got {theta}")));
        }
        Ok(Self { theta })
    }

    pub fn separable() -> Self {
        Self { theta: 0.0 }
    }

    pub fn bell() -> Self {
        Self { theta: FRAC_PI_4 }
    }
}

impl Default for InitialStateSpec {
    fn default() -> Self {
        Self::separable()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsSpec {
    pub model: HamiltonianModel,
    pub initial: InitialStateSpec,
    pub target_purity: f64,
    pub realizations: usize,
    /// Evolution cap; estimated from a pilot run when absent.
    pub t_max: Option<f64>,
    pub seed: u64,
}

impl DynamicsSpec {
    pub fn new(model: HamiltonianModel, target_purity: f64, realizations: usize, seed: u64) -> Self {
        Self { model, initial: InitialStateSpec::default(), target_purity, realizations, t_max: None, seed }
    }

    fn validate(&self) -> Result<()> {
        if !(self.target_purity > 0.25 && self.target_purity < 1.0) {
            return Err(Error::invalid(format!(
                "target purity must lie in (1/4, 1), got {}",
                self.target_purity
            )));
        }
        if self.realizations == 0 {
            return Err(Error::invalid("need at least one realization"));
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid(format!("t_max must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// Adds `eps · (V ⊗ 1)` where `V` acts on the environment and one qubit.
fn add_env_qubit_term(h: &mut CMatrix, v: &CMatrix, m: usize, eps: f64, qubit: usize) {
    for e in 0..m {
        for e2 in 0..m {
            for a in 0..2 {
                for b in 0..2 {
                    let val = v[(2 * e + a, 2 * e2 + b)] * eps;
                    for other in 0..2 {
                        let (r, c) = if qubit == 0 {
                            (4 * e + 2 * a + other, 4 * e2 + 2 * b + other)
                        } else {
                            (4 * e + 2 * other + a, 4 * e2 + 2 * other + b)
                        };
                        h[(r, c)] += val;
                    }
                }
            }
        }
    }
}

fn env_hamiltonian<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<CMatrix> {
    let h_env = sample_gue(m, rng)?;
    let mut h = CMatrix::zeros(4 * m, 4 * m);
    for e in 0..m {
        for e2 in 0..m {
            for c in 0..4 {
                h[(4 * e + c, 4 * e2 + c)] = h_env[(e, e2)];
            }
        }
    }
    Ok(h)
}

/// Hermitian Hamiltonian on the `4m`-dimensional space.
pub fn build_hamiltonian<R: Rng + ?Sized>(model: &HamiltonianModel, rng: &mut R) -> Result<CMatrix> {
    let m = model.m;
    let eps = model.epsilon;
    match model.kind {
        ModelKind::Global => sample_gue(4 * m, rng),
        ModelKind::Coupling => {
            let mut h = env_hamiltonian(m, rng)?;
            let v = sample_gue(4 * m, rng)?;
            h += v * C64::new(eps, 0.0);
            Ok(h)
        }
        ModelKind::Spectator => {
            let mut h = env_hamiltonian(m, rng)?;
            let v = sample_gue(2 * m, rng)?;
            add_env_qubit_term(&mut h, &v, m, eps, 0);
            Ok(h)
        }
        ModelKind::Common => {
            let mut h = env_hamiltonian(m, rng)?;
            let v1 = sample_gue(2 * m, rng)?;
            add_env_qubit_term(&mut h, &v1, m, eps, 0);
            let v2 = sample_gue(2 * m, rng)?;
            add_env_qubit_term(&mut h, &v2, m, eps, 1);
            Ok(h)
        }
    }
}

/// Haar-random environment state times the central state of `spec`.
pub fn initial_state<R: Rng + ?Sized>(spec: &InitialStateSpec, m: usize, rng: &mut R) -> Result<StateVector> {
    let env = haar_random_state(m, rng)?;
    let (s, c) = spec.theta.sin_cos();
    let central = CVector::from_vec(vec![
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(c, 0.0),
    ]);
    Ok(env.tensor(&StateVector::normalized(central)?))
}

/// Spectral propagator `ψ(t) = U e^{-iΛt} U† ψ₀`.
pub struct Propagator {
    basis: CMatrix,
    energies: Vec<f64>,
    coefficients: CVector,
    m: usize,
    scratch: CVector,
}

impl Propagator {
    pub fn new(hamiltonian: &CMatrix, psi0: &StateVector) -> Result<Self> {
        let d = hamiltonian.nrows();
        if d != psi0.dim() || d % 4 != 0 {
            return Err(Error::invalid(format!(
                "Hamiltonian of size {d} does not match a state of dimension {}",
                psi0.dim()
            )));
        }
        let eig = SymmetricEigen::new(hamiltonian.clone());
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("Hamiltonian diagonalization failed".into()));
        }
        let coefficients = eig.eigenvectors.ad_mul(psi0.amplitudes());
        Ok(Self {
            basis: eig.eigenvectors,
            energies: eig.eigenvalues.iter().copied().collect(),
            coefficients,
            m: d / 4,
            scratch: CVector::zeros(d),
        })
    }

    fn evolve(&mut self, t: f64) -> CVector {
        for (k, (&e, &c)) in self.energies.iter().zip(self.coefficients.iter()).enumerate() {
            let (s, co) = (e * t).sin_cos();
            self.scratch[k] = c * C64::new(co, -s);
        }
        &self.basis * &self.scratch
    }

    pub fn state_at(&mut self, t: f64) -> StateVector {
        StateVector::normalized(self.evolve(t)).expect("unitary evolution keeps the state nonzero")
    }

    /// Evolved amplitudes without renormalization.
    pub fn amplitudes_at(&mut self, t: f64) -> CVector {
        self.evolve(t)
    }

    pub fn reduced_at(&mut self, t: f64) -> CMatrix {
        let psi = self.evolve(t);
        reduce_amplitudes(psi.as_slice(), self.m, 4)
    }

    pub fn purity_at(&mut self, t: f64) -> f64 {
        self.reduced_at(t).iter().map(|z| z.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    /// Central spectrum at `t_hit`, or at `t_max` when not converged.
    pub spectrum: EigenvalueVector,
    pub t_hit: f64,
    pub converged: bool,
}

/// First time the central purity reaches `target`, located by adaptive
/// coarse stepping and bisection.
pub fn evolve_to_purity(hamiltonian: &CMatrix, psi0: &StateVector, target: f64, t_max: f64) -> Result<EvolutionResult> {
    if !(target > 0.25 && target < 1.0) {
        return Err(Error::invalid(format!("target purity must lie in (1/4, 1), got {target}")));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::invalid(format!("t_max must be positive, got {t_max}")));
    }
    let mut prop = Propagator::new(hamiltonian, psi0)?;
    let Some(t_hit) = first_crossing(&mut prop, target, t_max) else {
        let rho = DensityMatrix::from_trusted(prop.reduced_at(t_max));
        return Ok(EvolutionResult { spectrum: eigenvalues_sorted(&rho)?, t_hit: t_max, converged: false });
    };
    let rho = DensityMatrix::from_trusted(prop.reduced_at(t_hit));
    Ok(EvolutionResult { spectrum: eigenvalues_sorted(&rho)?, t_hit, converged: true })
}

fn first_crossing(prop: &mut Propagator, target: f64, t_max: f64) -> Option<f64> {
    let dt_max = t_max / COARSE_STEPS;
    let mut dt = dt_max;
    let mut t = 0.0;
    let mut p = prop.purity_at(0.0);
    if p <= target {
        return Some(0.0);
    }
    while t < t_max {
        let t_next = (t + dt).min(t_max);
        let p_next = prop.purity_at(t_next);
        if (p_next - p).abs() > MAX_PURITY_STEP && dt > t_max * 1e-14 {
            dt *= 0.5;
            continue;
        }
        if p_next <= target {
            return Some(bisect(prop, target, t, t_next));
        }
        if (p_next - p).abs() < 0.25 * MAX_PURITY_STEP {
            dt = (dt * 2.0).min(dt_max);
        }
        t = t_next;
        p = p_next;
    }
    None
}

/// `lo` has purity above the target, `hi` at or below it.
fn bisect(prop: &mut Propagator, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = prop.purity_at(mid);
        if (p - target).abs() <= CROSSING_TOL || mid <= lo || mid >= hi {
            return mid;
        }
        if p > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One realization with its own Hamiltonian and environment state.
fn realization(spec: &DynamicsSpec, stream: u64, t_max: f64) -> Result<EvolutionResult> {
    let mut rng = substream(spec.seed, stream);
    let h = build_hamiltonian(&spec.model, &mut rng)?;
    let psi0 = initial_state(&spec.initial, spec.model.m, &mut rng)?;
    evolve_to_purity(&h, &psi0, spec.target_purity, t_max)
}

/// Horizon for the pilot run, generous enough for weak coupling.
fn pilot_horizon(model: &HamiltonianModel) -> f64 {
    match model.kind {
        ModelKind::Global => 1e3,
        _ => {
            let eps = model.epsilon.clamp(1e-4, 1.0);
            1e3 / (eps * eps)
        }
    }
}

/// `t_max` as a fixed multiple of the median first-crossing time of a short
/// pilot run on auxiliary streams.
pub fn estimate_t_max(spec: &DynamicsSpec) -> Result<f64> {
    let horizon = pilot_horizon(&spec.model);
    let results: Vec<Result<EvolutionResult>> = (0..PILOT_REALIZATIONS)
        .into_par_iter()
        .map(|i| realization(spec, AUX_STREAM_BASE + i as u64, horizon))
        .collect();
    let mut times = Vec::new();
    for r in results {
        let r = r?;
        if r.converged {
            times.push(r.t_hit);
        }
    }
    if times.is_empty() {
        return Ok(horizon);
    }
    times.sort_by(f64::total_cmp);
    let k = times.len();
    let median = if k % 2 == 1 { times[k / 2] } else { 0.5 * (times[k / 2 - 1] + times[k / 2]) };
    Ok((PILOT_FACTOR * median).min(horizon))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicRun {
    pub spec: DynamicsSpec,
    pub t_max: f64,
    /// Every attempted realization in index order.
    pub outcomes: Vec<EvolutionResult>,
}

impl DynamicRun {
    pub fn converged(&self) -> impl Iterator<Item = &EvolutionResult> {
        self.outcomes.iter().filter(|r| r.converged)
    }

    pub fn discarded(&self) -> usize {
        self.outcomes.iter().filter(|r| !r.converged).count()
    }

    pub fn discard_fraction(&self) -> f64 {
        self.discarded() as f64 / self.outcomes.len() as f64
    }

    /// Spectra of converged realizations.
    pub fn samples(&self) -> SampleSet {
        let mut set = SampleSet::with_capacity(4, self.outcomes.len());
        for r in self.converged() {
            set.push_sorted(r.spectrum.values());
        }
        set
    }
}

/// Runs `spec.realizations` independent realizations in parallel, realization
/// `i` on stream `(seed, i)`.
pub fn run_dynamic_ensemble(spec: &DynamicsSpec) -> Result<DynamicRun> {
    spec.validate()?;
    let t_max = match spec.t_max {
        Some(t) => t,
        None => estimate_t_max(spec)?,
    };
    let outcomes = (0..spec.realizations)
        .into_par_iter()
        .map(|i| realization(spec, i as u64, t_max))
        .collect::<Result<Vec<_>>>()?;
    let run = DynamicRun { spec: *spec, t_max, outcomes };
    if run.discarded() == run.outcomes.len() {
        return Err(Error::EmptyEnsemble(format!(
            "all {} realizations of the {} model stayed above purity {} until t = {t_max}",
            spec.realizations,
            spec.model.kind.name(),
            spec.target_purity
        )));
    }
    Ok(run)
}
