//! Fixed-purity eigenvalue ensemble on the chart of the first `n - 2`
//! eigenvalues.
//!
//! The last two eigenvalues are recovered from the normalization and purity
//! constraints. The joint eigenvalue density of a Haar-random pure state on
//! `C^m ⊗ C^n` is proportional to `Π λ^{|m-n|} · Π_{i<j} (λ_i - λ_j)²`;
//! restricting it to the fixed-purity surface and writing it in chart
//! coordinates brings in a power of the tail Jacobian
//! `J = 2 (λ_n - λ_{n-1})`, selected by [`ChartMeasure`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_sqrt_ends, Tolerance};

/// Discriminants within `DISC_SLACK` of zero are treated as zero, so points
/// computed on the outer curve get an exactly degenerate tail.
const DISC_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Constraint {
    Purity { value: f64 },
    /// Von Neumann entropy in logarithm base `base`.
    Entropy { value: f64, base: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticEnsembleSpec {
    pub n: usize,
    pub m: usize,
    pub constraint: Constraint,
}

impl StaticEnsembleSpec {
    pub fn purity(n: usize, m: usize, purity: f64) -> Result<Self> {
        check_dims(n, m)?;
        let lo = 1.0 / n as f64;
        if !(purity >= lo - 1e-15 && purity <= 1.0) {
            return Err(Error::invalid(format!(
                "purity {purity} outside [1/{n}, 1]"
            )));
        }
        Ok(Self { n, m, constraint: Constraint::Purity { value: purity } })
    }

    pub fn entropy(n: usize, m: usize, entropy: f64) -> Result<Self> {
        Self::entropy_with_base(n, m, entropy, std::f64::consts::E)
    }

    pub fn entropy_with_base(n: usize, m: usize, entropy: f64, base: f64) -> Result<Self> {
        check_dims(n, m)?;
        if !(base > 1.0) {
            return Err(Error::invalid("entropy log base must exceed 1"));
        }
        let max = (n as f64).ln() / base.ln();
        if !(entropy >= 0.0 && entropy <= max + 1e-15) {
            return Err(Error::invalid(format!(
                "entropy {entropy} outside [0, {max}] for n = {n}, base {base}"
            )));
        }
        Ok(Self { n, m, constraint: Constraint::Entropy { value: entropy, base } })
    }

    /// Power of `Π λ` in the joint density.
    pub fn exponent(&self) -> f64 {
        self.m.abs_diff(self.n) as f64
    }

    pub fn purity_value(&self) -> Result<f64> {
        match self.constraint {
            Constraint::Purity { value } => Ok(value),
            Constraint::Entropy { .. } => Err(Error::Unsupported(
                "operation requires a purity constraint".into(),
            )),
        }
    }
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n < 2 || m < 2 {
        return Err(Error::invalid(format!("need n >= 2 and m >= 2, got n = {n}, m = {m}")));
    }
    Ok(())
}

/// Which density the chart coordinates carry.
///
/// The constrained eigenvalue measure, i.e. the joint density conditioned on
/// the purity surface, is `Conditional`: the delta functions fixing the trace
/// and the purity integrate out the tail with weight `1/J`. It is the only
/// choice under which the chart density is consistent with sorting all `n`
/// eigenvalues. `Lebesgue` drops the Jacobian altogether and
/// `JacobianWeighted` multiplies by it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartMeasure {
    #[default]
    Conditional,
    Lebesgue,
    JacobianWeighted,
}

impl ChartMeasure {
    pub fn jacobian_power(self) -> i32 {
        match self {
            ChartMeasure::Conditional => -1,
            ChartMeasure::Lebesgue => 0,
            ChartMeasure::JacobianWeighted => 1,
        }
    }
}

impl std::str::FromStr for ChartMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conditional" => Ok(ChartMeasure::Conditional),
            "lebesgue" => Ok(ChartMeasure::Lebesgue),
            "jacobian-weighted" => Ok(ChartMeasure::JacobianWeighted),
            other => Err(Error::invalid(format!("unknown chart measure '{other}'"))),
        }
    }
}

/// A chart point with its recovered tail `(λ_{n-1}, λ_n)`, `λ_{n-1} <= λ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub free: Vec<f64>,
    pub recovered: (f64, f64),
    pub physical: bool,
}

impl ChartPoint {
    pub fn new(free: &[f64], purity: f64) -> Result<Self> {
        let (s1, s2) = sums(free)?;
        let r = 1.0 - s1;
        let gap = tail_gap(s1, s2, purity)?;
        let recovered = (0.5 * (r - gap), 0.5 * (r + gap));
        let physical = recovered.0 >= 0.0 && free.iter().all(|&x| x >= 0.0);
        Ok(Self { free: free.to_vec(), recovered, physical })
    }

    /// All `n` eigenvalues in chart order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v = self.free.clone();
        v.push(self.recovered.0);
        v.push(self.recovered.1);
        v
    }
}

fn sums(free: &[f64]) -> Result<(f64, f64)> {
    if free.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("chart coordinates must be finite"));
    }
    Ok((free.iter().sum(), free.iter().map(|x| x * x).sum()))
}

/// `λ_n - λ_{n-1} = sqrt(2(P - s₂) - (1 - s₁)²)`.
fn tail_gap(s1: f64, s2: f64, purity: f64) -> Result<f64> {
    let r = 1.0 - s1;
    let disc = 2.0 * (purity - s2) - r * r;
    if disc < -DISC_SLACK || disc.is_nan() {
        return Err(Error::NotRealizable(format!(
            "tail discriminant {disc:e} is negative"
        )));
    }
    if disc < DISC_SLACK {
        return Ok(0.0);
    }
    Ok(disc.sqrt())
}

/// The two eigenvalues fixed by normalization and purity, ascending.
pub fn recover_tail(free: &[f64], purity: f64) -> Result<(f64, f64)> {
    let point = ChartPoint::new(free, purity)?;
    if !point.physical {
        return Err(Error::Nonphysical(format!(
            "recovered eigenvalue {} or a chart coordinate is negative",
            point.recovered.0
        )));
    }
    Ok(point.recovered)
}

/// `J = 2 (λ_n - λ_{n-1})`.
pub fn jacobian_factor(free: &[f64], purity: f64) -> Result<f64> {
    let (s1, s2) = sums(free)?;
    Ok(2.0 * tail_gap(s1, s2, purity)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakLocations {
    pub minus: f64,
    pub plus: f64,
    /// Whether placing `n - 1` eigenvalues at `plus` leaves the last one
    /// nonnegative.
    pub plus_physical: bool,
}

/// Values `Λ±` such that `n - 1` eigenvalues equal to `Λ` are compatible with
/// purity `P`.
pub fn peak_locations(n: usize, purity: f64) -> Result<PeakLocations> {
    if n < 2 {
        return Err(Error::invalid("n must be at least 2"));
    }
    let nf = n as f64;
    if !(purity >= 1.0 / nf - 1e-15 && purity <= 1.0) {
        return Err(Error::invalid(format!("purity {purity} outside [1/{n}, 1]")));
    }
    let root = ((nf * purity - 1.0).max(0.0) / (nf - 1.0)).sqrt();
    let minus = (1.0 - root) / nf;
    let plus = (1.0 + root) / nf;
    Ok(PeakLocations { minus, plus, plus_physical: 1.0 - (nf - 1.0) * plus >= 0.0 })
}

/// Largest eigenvalue any spectrum of purity `P` can have.
pub fn max_eigenvalue(n: usize, purity: f64) -> f64 {
    let nf = n as f64;
    (1.0 + ((nf - 1.0) * (nf * purity - 1.0)).max(0.0).sqrt()) / nf
}

/// Natural log of the unnormalized chart density; `-inf` off the physical
/// domain.
pub fn log_density(free: &[f64], exponent: f64, purity: f64, measure: ChartMeasure) -> f64 {
    let Ok(point) = ChartPoint::new(free, purity) else {
        return f64::NEG_INFINITY;
    };
    if !point.physical {
        return f64::NEG_INFINITY;
    }
    log_density_of(&point.free, point.recovered, exponent, measure.jacobian_power())
}

/// Density for eigenvalues `free ++ [tail.0, tail.1]` already known to be
/// physical. `J` is folded into the tail factor of the Vandermonde product so
/// the outer boundary evaluates to zero rather than `0/0`.
pub(crate) fn log_density_of(free: &[f64], tail: (f64, f64), exponent: f64, power: i32) -> f64 {
    let (t3, t4) = tail;
    let mut prod = t3 * t4;
    let mut vand = 1.0;
    for (i, &a) in free.iter().enumerate() {
        prod *= a;
        for &b in &free[i + 1..] {
            vand *= (a - b) * (a - b);
        }
        vand *= (a - t3) * (a - t3) * (a - t4) * (a - t4);
    }
    let gap = t4 - t3;
    let tail_power = 2 + power;
    let mut log = vand.ln() + tail_power as f64 * gap.ln() + power as f64 * std::f64::consts::LN_2;
    if exponent != 0.0 {
        log += exponent * prod.ln();
    }
    if log.is_nan() {
        f64::NEG_INFINITY
    } else {
        log
    }
}

/// `J^k · Π λ^{|m-n|} · Π_{i<j} (λ_i - λ_j)²` in the default measure; zero off
/// the physical domain.
pub fn unnormalized_density(free: &[f64], spec: &StaticEnsembleSpec) -> Result<f64> {
    unnormalized_density_with(free, spec, ChartMeasure::default())
}

pub fn unnormalized_density_with(
    free: &[f64],
    spec: &StaticEnsembleSpec,
    measure: ChartMeasure,
) -> Result<f64> {
    if free.len() + 2 != spec.n {
        return Err(Error::invalid(format!(
            "expected {} chart coordinates, got {}",
            spec.n - 2,
            free.len()
        )));
    }
    let p = spec.purity_value()?;
    Ok(log_density(free, spec.exponent(), p, measure).exp())
}

/// Quadratic approximation of the density around the degenerate peak
/// `(Λ₋, …, Λ₋)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakModel {
    pub n: usize,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    /// `g = Π λ` at the peak.
    pub g_max: f64,
    /// Curvature of `g`: near the peak `g ≈ g_max - α δᵀ A δ`.
    pub alpha: f64,
    pub sigma2: f64,
    /// `(n-2)×(n-2)` matrix with 2 on the diagonal and 1 elsewhere.
    pub a: DMatrix<f64>,
}

impl PeakModel {
    pub fn new(spec: &StaticEnsembleSpec) -> Result<Self> {
        let p = spec.purity_value()?;
        if spec.m <= spec.n {
            return Err(Error::Unsupported(format!(
                "peak approximation needs m > n, got m = {}, n = {}",
                spec.m, spec.n
            )));
        }
        if spec.n < 3 {
            return Err(Error::Unsupported("peak approximation needs n >= 3".into()));
        }
        let n = spec.n;
        let nf = n as f64;
        let peaks = peak_locations(n, p)?;
        let lam = peaks.minus;
        let g_max = lam.powi(n as i32 - 1) * (1.0 - (nf - 1.0) * lam);
        let alpha = 0.5 * lam.powi(n as i32 - 3) * (1.0 - nf * lam);
        if !(alpha > 0.0) {
            return Err(Error::Unsupported(format!(
                "peak approximation degenerates at purity {p}"
            )));
        }
        let sigma2 = g_max / (alpha * spec.exponent());
        let k = n - 2;
        let a = DMatrix::from_fn(k, k, |i, j| if i == j { 2.0 } else { 1.0 });
        Ok(Self { n, lambda_minus: lam, lambda_plus: peaks.plus, g_max, alpha, sigma2, a })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Gaussian in the displacement from the peak times the squared leading
    /// order of the Vandermonde node factor.
    pub fn density(&self, free: &[f64]) -> f64 {
        let lam = self.lambda_minus;
        let k = self.n - 2;
        let s1: f64 = free.iter().sum();
        let mut quad = 0.0;
        let mut node = 1.0;
        for i in 0..k {
            let di = free[i] - lam;
            for j in 0..k {
                quad += di * self.a[(i, j)] * (free[j] - lam);
            }
            for j in (i + 1)..k {
                node *= free[i] - free[j];
            }
            node *= free[i] + s1 - (self.n as f64 - 1.0) * lam;
        }
        (-quad / self.sigma2).exp() * node * node
    }

    /// Local maxima of the two-dimensional approximation.
    pub fn maxima(&self) -> Vec<[f64; 2]> {
        let d = self.sigma() * 1.5f64.sqrt();
        let l = self.lambda_minus;
        [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, -1.0), (-1.0, 1.0)]
            .iter()
            .map(|(u, v)| [l + d * u, l + d * v])
            .collect()
    }
}

pub fn gaussian_approx_density(free: &[f64], spec: &StaticEnsembleSpec) -> Result<f64> {
    let model = PeakModel::new(spec)?;
    if free.len() + 2 != spec.n {
        return Err(Error::invalid("chart dimension mismatch"));
    }
    Ok(model.density(free))
}

/// Values of the second chart coordinate at which `(x, y)` is physical for
/// `n = 4`, as disjoint closed intervals.
pub fn physical_intervals(x: f64, purity: f64) -> Vec<(f64, f64)> {
    if !(x >= 0.0) {
        return Vec::new();
    }
    let c = 1.0 - x;
    let q = purity - x * x;
    let r1 = 6.0 * q - 2.0 * c * c;
    if r1 < 0.0 {
        return Vec::new();
    }
    let s1 = r1.sqrt();
    let lo = ((c - s1) / 3.0).max(0.0);
    let hi = ((c + s1) / 3.0).min(c);
    if hi <= lo {
        return Vec::new();
    }
    let r2 = 2.0 * q - c * c;
    if r2 <= 0.0 {
        return vec![(lo, hi)];
    }
    let s2 = r2.sqrt();
    let (h0, h1) = ((c - s2) / 2.0, (c + s2) / 2.0);
    let mut out = Vec::with_capacity(2);
    if h0 > lo {
        out.push((lo, h0.min(hi)));
    }
    if h1 < hi {
        out.push((h1.max(lo), hi));
    }
    out
}

/// Normalized chart density for `n = 4`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDensity {
    pub m: usize,
    pub purity: f64,
    pub measure: ChartMeasure,
    exponent: f64,
    log_offset: f64,
    norm: f64,
}

/// Grid of density values; `values[i * ys.len() + j]` is at `(xs[i], ys[j])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

impl ChartDensity {
    pub fn new(m: usize, purity: f64, measure: ChartMeasure) -> Result<Self> {
        let spec = StaticEnsembleSpec::purity(4, m, purity)?;
        if purity <= 0.25 || purity >= 1.0 {
            return Err(Error::invalid(format!(
                "normalized density needs purity in (1/4, 1), got {purity}"
            )));
        }
        let exponent = spec.exponent();
        let extent = max_eigenvalue(4, purity);
        let k = 128;
        let mut log_offset = f64::NEG_INFINITY;
        for i in 0..=k {
            for j in 0..=k {
                let x = extent * i as f64 / k as f64;
                let y = extent * j as f64 / k as f64;
                log_offset = log_offset.max(log_density(&[x, y], exponent, purity, measure));
            }
        }
        if !log_offset.is_finite() {
            return Err(Error::NumericalFailure("density vanishes on the whole grid".into()));
        }
        let mut density = Self { m, purity, measure, exponent, log_offset, norm: 1.0 };
        let total = density.raw_mass(0.0, extent, 0.0, extent, 1e-10)?;
        if !(total > 0.0) {
            return Err(Error::NumericalFailure("normalization integral vanished".into()));
        }
        density.norm = total;
        Ok(density)
    }

    /// Side of the square `[0, extent]²` containing the physical region.
    pub fn extent(&self) -> f64 {
        max_eigenvalue(4, self.purity)
    }

    fn scaled(&self, x: f64, y: f64) -> f64 {
        (log_density(&[x, y], self.exponent, self.purity, self.measure) - self.log_offset).exp()
    }

    /// Normalizing constant in the natural (unscaled) units of
    /// [`unnormalized_density_with`], as a natural logarithm.
    pub fn log_normalization(&self) -> f64 {
        self.norm.ln() + self.log_offset
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.scaled(x, y) / self.norm
    }

    fn raw_mass(&self, x0: f64, x1: f64, y0: f64, y1: f64, abs_tol: f64) -> Result<f64> {
        let extent = self.extent();
        let (x0, x1) = (x0.max(0.0), x1.min(extent));
        if x1 <= x0 {
            return Ok(0.0);
        }
        let inner_tol = Tolerance { abs: abs_tol * 0.1, rel: 1e-12, max_intervals: 400 };
        let mut failure = None;
        let outer = |x: f64| -> f64 {
            let mut sum = 0.0;
            for (a, b) in physical_intervals(x, self.purity) {
                let (a, b) = (a.max(y0), b.min(y1));
                if b <= a {
                    continue;
                }
                match integrate_sqrt_ends(|y| self.scaled(x, y), a, b, inner_tol) {
                    Ok(r) => sum += r.value,
                    Err(e) => {
                        failure.get_or_insert(e);
                    }
                }
            }
            sum
        };
        let tol = Tolerance { abs: abs_tol, rel: 1e-10, max_intervals: 4000 };
        let total = integrate(outer, x0, x1, tol)?.value;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(total)
    }

    /// Probability of the rectangle `[x0, x1] × [y0, y1]`.
    pub fn mass(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Result<f64> {
        Ok(self.raw_mass(x0, x1, y0, y1, 1e-11 * self.norm)? / self.norm)
    }

    /// Density on a `points × points` grid spanning `[0, extent]²`.
    pub fn grid(&self, points: usize) -> Result<DensityGrid> {
        if points < 2 {
            return Err(Error::invalid("grid needs at least 2 points per axis"));
        }
        let extent = self.extent();
        let axis: Vec<f64> = (0..points)
            .map(|i| extent * i as f64 / (points - 1) as f64)
            .collect();
        let mut values = Vec::with_capacity(points * points);
        for &x in &axis {
            for &y in &axis {
                values.push(self.value(x, y));
            }
        }
        Ok(DensityGrid { xs: axis.clone(), ys: axis, values })
    }
}
