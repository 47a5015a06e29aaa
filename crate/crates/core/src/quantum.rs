//! Linear-algebra and sampling primitives: GUE matrices, Haar-random states,
//! partial traces and spectral functionals of reduced density matrices.
//!
//! Tensor products are laid out environment first, `H = H_env ⊗ H_cen`, so
//! the environment index is the slow one: amplitude `(e, c)` lives at
//! `e * n + c`. When the central system is two qubits, `c = 2 * q1 + q2`.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const NORM_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-10;
/// Eigenvalues in `[-CLAMP_TOL, 0)` are round-off and clamped to zero; anything
/// lower is reported as a numerical failure.
pub const CLAMP_TOL: f64 = 1e-10;

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("state vector must have dimension >= 1"));
        }
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!(
                "state vector has squared norm {norm_sqr}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        amplitudes.unscale_mut(norm);
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `self ⊗ other`, with `self` as the slow factor.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let (a, b) = (&self.amplitudes, &other.amplitudes);
        let amps = CVector::from_fn(a.len() * b.len(), |k, _| a[k / b.len()] * b[k % b.len()]);
        StateVector { amplitudes: amps }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::invalid("density matrix must be square and non-empty"));
        }
        let scale = entries.norm().max(1.0);
        let herm_err = (&entries - entries.adjoint()).norm();
        if herm_err > NORM_TOL * scale {
            return Err(Error::invalid(format!(
                "matrix is not Hermitian (deviation {herm_err:e})"
            )));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::invalid(format!("trace is {trace}, expected 1")));
        }
        let rho = Self { entries };
        rho.eigenvalues()?;
        Ok(rho)
    }

    /// Skips validation; for matrices that are density matrices by construction.
    pub(crate) fn from_trusted(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// `tr ρ²`, which for a Hermitian matrix is the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.entries.norm_squared()
    }

    pub fn eigenvalues(&self) -> Result<EigenvalueVector> {
        eigenvalues_sorted(self)
    }
}

/// Spectrum of a density matrix in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueVector {
    values: Vec<f64>,
}

impl EigenvalueVector {
    /// Sorts `values` ascending and checks positivity and unit sum.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("eigenvalue vector must be non-empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("eigenvalues must be finite"));
        }
        values.sort_by(f64::total_cmp);
        if values[0] < 0.0 {
            return Err(Error::invalid(format!("negative eigenvalue {}", values[0])));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("eigenvalues sum to {sum}, expected 1")));
        }
        Ok(Self { values })
    }

    pub(crate) fn from_sorted_trusted(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn purity(&self) -> f64 {
        purity(&self.values)
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(&self.values, std::f64::consts::E)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }
}

/// Bipartition `env ⊗ cen` of the full Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpaceLayout {
    pub env: usize,
    pub central: usize,
    /// The central system is two qubits, `cen = q1 ⊗ q2`.
    pub qubit_split: bool,
}

impl HilbertSpaceLayout {
    pub fn new(env: usize, central: usize) -> Result<Self> {
        if env == 0 || central == 0 {
            return Err(Error::invalid("layout dimensions must be positive"));
        }
        Ok(Self { env, central, qubit_split: false })
    }

    pub fn two_qubits(env: usize) -> Result<Self> {
        let mut layout = Self::new(env, 4)?;
        layout.qubit_split = true;
        Ok(layout)
    }

    pub fn total_dim(&self) -> usize {
        self.env * self.central
    }
}

/// GUE matrix `H = (A + A†)/2`, where `A` has independent complex Gaussian
/// entries with `E|A_ij|² = 1`.
///
/// Under this convention the diagonal entries are real with variance 1/2 and
/// the real and imaginary parts of each off-diagonal entry have variance 1/4.
pub fn sample_gue<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::invalid("GUE dimension must be >= 1"));
    }
    let mut h = CMatrix::zeros(dim, dim);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        let re: f64 = rng.sample(StandardNormal);
        h[(i, i)] = C64::new(re * half, 0.0);
        for j in (i + 1)..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            // (A_ij + conj(A_ji)) / 2 with unit-variance complex entries
            let z = C64::new(re * 0.5, im * 0.5);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    Ok(h)
}

/// Pure state drawn from the unitarily invariant measure.
pub fn haar_random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::invalid("state dimension must be >= 1"));
    }
    let amps = CVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    StateVector::normalized(amps)
}

/// Reduced state of the central factor, `ρ = tr_env |ψ⟩⟨ψ|`.
pub fn partial_trace_env(psi: &StateVector, layout: &HilbertSpaceLayout) -> Result<DensityMatrix> {
    if psi.dim() != layout.total_dim() {
        return Err(Error::invalid(format!(
            "state dimension {} does not match layout {}x{}",
            psi.dim(),
            layout.env,
            layout.central
        )));
    }
    Ok(DensityMatrix::from_trusted(reduce_amplitudes(
        psi.amplitudes().as_slice(),
        layout.env,
        layout.central,
    )))
}

/// `ρ_{cc'} = Σ_e ψ_{e,c} conj(ψ_{e,c'})` for amplitudes stored env-major.
pub(crate) fn reduce_amplitudes(amps: &[C64], env: usize, central: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(central, central);
    for e in 0..env {
        let row = &amps[e * central..(e + 1) * central];
        for c in 0..central {
            for d in c..central {
                rho[(c, d)] += row[c] * row[d].conj();
            }
        }
    }
    for c in 0..central {
        rho[(c, c)].im = 0.0;
        for d in (c + 1)..central {
            rho[(d, c)] = rho[(c, d)].conj();
        }
    }
    rho
}

/// Which qubit of a two-qubit central system to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qubit {
    First,
    Second,
}

/// Single-qubit reduced state of a two-qubit density matrix (`c = 2 q1 + q2`).
pub fn reduce_to_qubit(rho: &DensityMatrix, keep: Qubit) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::invalid("qubit reduction needs a 4x4 density matrix"));
    }
    let r = rho.entries();
    let out = CMatrix::from_fn(2, 2, |a, b| match keep {
        Qubit::First => r[(2 * a, 2 * b)] + r[(2 * a + 1, 2 * b + 1)],
        Qubit::Second => r[(a, b)] + r[(2 + a, 2 + b)],
    });
    Ok(DensityMatrix::from_trusted(out))
}

/// `Σ λ²`.
pub fn purity(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum()
}

/// `-Σ λ log_base λ` with `0 log 0 = 0`.
pub fn von_neumann_entropy(values: &[f64], base: f64) -> f64 {
    let s: f64 = values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum();
    s / base.ln()
}

/// Eigenvalues of `rho` ascending, with round-off negatives clamped to zero.
pub fn eigenvalues_sorted(rho: &DensityMatrix) -> Result<EigenvalueVector> {
    let eig = SymmetricEigen::new(rho.entries().clone());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
    }
    if values[0] < -CLAMP_TOL {
        return Err(Error::NumericalFailure(format!(
            "eigenvalue {} below clamp threshold -{CLAMP_TOL:e}",
            values[0]
        )));
    }
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(EigenvalueVector::from_sorted_trusted(values))
}
