//! Densities of the smallest and second-smallest eigenvalue for `n = 4` at
//! fixed purity, obtained by integrating the chart density over the ordered
//! region `λ₁ <= λ₂ <= λ₃ <= λ₄`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{log_density, peak_locations, ChartMeasure};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_sqrt_ends, Tolerance};

pub const DEFAULT_RESOLUTION: usize = 512;
const INNER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Lambda1,
    Lambda2,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::Lambda1 => "lambda1",
            Which::Lambda2 => "lambda2",
        }
    }

    /// Index of this eigenvalue in an ascending spectrum.
    pub fn index(self) -> usize {
        match self {
            Which::Lambda1 => 0,
            Which::Lambda2 => 1,
        }
    }
}

impl std::str::FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda1" | "1" => Ok(Which::Lambda1),
            "lambda2" | "2" => Ok(Which::Lambda2),
            other => Err(Error::invalid(format!("unknown marginal '{other}'"))),
        }
    }
}

/// Marginal density sampled on a uniform grid and normalized so that its
/// piecewise-linear interpolant integrates to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalCurve {
    pub which: Which,
    pub m: usize,
    pub purity: f64,
    pub measure: ChartMeasure,
    pub abscissas: Vec<f64>,
    pub densities: Vec<f64>,
}

impl MarginalCurve {
    pub fn support(&self) -> (f64, f64) {
        (self.abscissas[0], *self.abscissas.last().unwrap_or(&self.abscissas[0]))
    }

    /// Linear interpolation; zero outside the support.
    pub fn value(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(x >= lo && x <= hi) || hi <= lo {
            return 0.0;
        }
        let h = (hi - lo) / (self.abscissas.len() - 1) as f64;
        let k = (((x - lo) / h) as usize).min(self.abscissas.len() - 2);
        let t = (x - self.abscissas[k]) / h;
        self.densities[k] * (1.0 - t) + self.densities[k + 1] * t
    }

    /// Exact integral of the interpolant over `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.support();
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        for k in 0..self.abscissas.len() - 1 {
            let (x0, x1) = (self.abscissas[k], self.abscissas[k + 1]);
            let (s, e) = (a.max(x0), b.min(x1));
            if e > s {
                total += 0.5 * (e - s) * (self.value(s) + self.value(e));
            }
        }
        total
    }

    pub fn mean(&self) -> f64 {
        let h = self.abscissas[1] - self.abscissas[0];
        let n = self.abscissas.len();
        // exact first moment of the piecewise-linear interpolant
        let mut total = 0.0;
        for k in 0..n - 1 {
            let (x0, f0, f1) = (self.abscissas[k], self.densities[k], self.densities[k + 1]);
            total += h * (x0 * (f0 + f1) / 2.0 + h * (f0 + 2.0 * f1) / 6.0);
        }
        total
    }
}

fn check(m: usize, purity: f64) -> Result<()> {
    if m < 4 {
        return Err(Error::invalid(format!("marginals need m >= 4, got {m}")));
    }
    if !(purity > 0.25 && purity < 1.0) {
        return Err(Error::invalid(format!("marginals need purity in (1/4, 1), got {purity}")));
    }
    Ok(())
}

/// Range of the chosen ordered eigenvalue at purity `P`.
pub fn support(which: Which, purity: f64) -> (f64, f64) {
    let p = purity;
    match which {
        Which::Lambda1 => {
            let r = (12.0 * p - 3.0).max(0.0).sqrt();
            (((1.0 - r) / 4.0).max(0.0), (3.0 - r) / 12.0)
        }
        Which::Lambda2 => {
            let lo = ((1.0 - (4.0 * p - 1.0).max(0.0).sqrt()) / 4.0).max(0.0);
            let hi = if p > 1.0 / 3.0 {
                (2.0 - (6.0 * p - 2.0).sqrt()) / 6.0
            } else {
                // λ₂ = λ₃ = λ₄ = Λ₊ is reachable while 1 - 3Λ₊ >= 0
                peak_locations(4, p).map(|pk| pk.plus).unwrap_or(0.25)
            };
            (lo, hi)
        }
    }
}

/// Integration range of the other free coordinate, given the value `v` of the
/// chosen one, inside the ordered region.
pub fn inner_limits(which: Which, purity: f64, v: f64) -> Option<(f64, f64)> {
    let p = purity;
    let r1 = 6.0 * p - 2.0 + 4.0 * v - 8.0 * v * v;
    if r1 < 0.0 {
        return None;
    }
    let s1 = r1.sqrt();
    let (lo, hi) = match which {
        Which::Lambda1 => (v.max((1.0 - v - s1) / 3.0), (2.0 - 2.0 * v - s1) / 6.0),
        Which::Lambda2 => {
            let r2 = 2.0 * p - 1.0 + 4.0 * v - 8.0 * v * v;
            let hi = if r2 < 0.0 { v } else { v.min((1.0 - 2.0 * v - r2.sqrt()) / 2.0) };
            (((1.0 - v - s1) / 3.0).max(0.0), hi)
        }
    };
    (hi > lo).then_some((lo, hi))
}

fn point(which: Which, v: f64, u: f64) -> [f64; 2] {
    match which {
        Which::Lambda1 => [v, u],
        Which::Lambda2 => [u, v],
    }
}

/// Marginal of the smallest eigenvalue in the default measure.
pub fn marginal_lambda1(m: usize, purity: f64, resolution: usize) -> Result<MarginalCurve> {
    marginal(Which::Lambda1, m, purity, resolution, ChartMeasure::default())
}

pub fn marginal_lambda2(m: usize, purity: f64, resolution: usize) -> Result<MarginalCurve> {
    marginal(Which::Lambda2, m, purity, resolution, ChartMeasure::default())
}

pub fn marginal(
    which: Which,
    m: usize,
    purity: f64,
    resolution: usize,
    measure: ChartMeasure,
) -> Result<MarginalCurve> {
    check(m, purity)?;
    if resolution < 3 {
        return Err(Error::invalid("marginal resolution must be at least 3"));
    }
    let exponent = (m - 4) as f64;
    let (lo, hi) = support(which, purity);
    let offset = log_scale(which, purity, exponent, measure, lo, hi);
    let abscissas: Vec<f64> = (0..resolution)
        .map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
        .collect();
    let tol = Tolerance { abs: INNER_TOL, rel: 0.0, max_intervals: 400 };
    let raw: Vec<Result<f64>> = abscissas
        .par_iter()
        .map(|&v| {
            let Some((a, b)) = inner_limits(which, purity, v) else {
                return Ok(0.0);
            };
            let f = |u: f64| (log_density(&point(which, v, u), exponent, purity, measure) - offset).exp();
            integrate_sqrt_ends(f, a, b, tol)
                .map(|r| r.value.max(0.0))
                .map_err(|e| {
                    Error::NumericalFailure(format!(
                        "{} marginal at {v} (m = {m}, P = {purity}): {e}",
                        which.name()
                    ))
                })
        })
        .collect();
    let mut densities = raw.into_iter().collect::<Result<Vec<f64>>>()?;
    let h = (hi - lo) / (resolution - 1) as f64;
    let area = h * (densities.iter().sum::<f64>() - 0.5 * (densities[0] + densities[resolution - 1]));
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "{} marginal has zero mass at m = {m}, P = {purity}",
            which.name()
        )));
    }
    for d in densities.iter_mut() {
        *d /= area;
    }
    Ok(MarginalCurve { which, m, purity, measure, abscissas, densities })
}

/// Largest log-integrand on a coarse grid over the ordered region.
fn log_scale(which: Which, purity: f64, exponent: f64, measure: ChartMeasure, lo: f64, hi: f64) -> f64 {
    let k = 96;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=k {
        let v = lo + (hi - lo) * i as f64 / k as f64;
        let Some((a, b)) = inner_limits(which, purity, v) else { continue };
        for j in 1..k {
            let u = a + (b - a) * j as f64 / k as f64;
            best = best.max(log_density(&point(which, v, u), exponent, purity, measure));
        }
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{ChartDensity, ChartPoint};
    use crate::quadrature::integrate;

    #[test]
    fn lambda1_support() {
        let (lo, hi) = support(Which::Lambda1, 0.4);
        assert_eq!(lo, 0.0);
        assert_eq!(hi, peak_locations(4, 0.4).unwrap().minus);
        let (lo, _) = support(Which::Lambda1, 0.3);
        assert!((lo - (1.0 - 0.6f64.sqrt()) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn lambda2_support_branches() {
        let (_, hi) = support(Which::Lambda2, 0.4);
        assert!((hi - (2.0 - 0.4f64.sqrt()) / 6.0).abs() < 1e-15);
        assert!((hi - 0.227_924).abs() < 1e-6);
        let (_, hi) = support(Which::Lambda2, 0.3);
        assert!((hi - (3.0 + 0.6f64.sqrt()) / 12.0).abs() < 1e-15);
        assert!((hi - 0.314_550).abs() < 1e-6);
    }

    fn ordered(x: f64, y: f64, p: f64) -> bool {
        match ChartPoint::new(&[x, y], p) {
            Ok(c) => c.physical && x <= y && y <= c.recovered.0,
            Err(_) => false,
        }
    }

    #[test]
    fn limits_enclose_exactly_the_ordered_region() {
        for &p in &[0.27, 0.3, 0.35, 0.4, 0.6, 0.8, 0.95] {
            for which in [Which::Lambda1, Which::Lambda2] {
                let (lo, hi) = support(which, p);
                for i in 0..=60 {
                    let v = -0.05 + 0.6 * (i as f64 + 0.37) / 60.0;
                    let limits = if v >= lo && v <= hi { inner_limits(which, p, v) } else { None };
                    for j in 0..=600 {
                        let u = 0.6 * j as f64 / 600.0;
                        let [x, y] = point(which, v, u);
                        let inside = limits.is_some_and(|(a, b)| u >= a && u <= b);
                        let near = limits.is_some_and(|(a, b)| (u - a).abs() < 1e-9 || (u - b).abs() < 1e-9);
                        if !near {
                            assert_eq!(inside, ordered(x, y, p), "{which:?} P={p} v={v} u={u} {limits:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn normalized_by_construction() {
        for which in [Which::Lambda1, Which::Lambda2] {
            let c = marginal(which, 8, 0.8, DEFAULT_RESOLUTION, ChartMeasure::default()).unwrap();
            let (lo, hi) = c.support();
            assert!((c.mass(lo, hi) - 1.0).abs() < 1e-12);
            assert!(c.densities.iter().all(|d| *d >= 0.0));
        }
    }

    #[test]
    fn means_of_two_smallest_bounded_by_half() {
        for &(m, p) in &[(8, 0.4), (16, 0.8), (4, 0.3)] {
            let a = marginal_lambda1(m, p, 256).unwrap().mean();
            let b = marginal_lambda2(m, p, 256).unwrap().mean();
            assert!(a + b <= 0.5, "m={m} P={p}: {a} + {b}");
            assert!(a <= b);
        }
    }

    #[test]
    fn vanishes_at_interior_upper_edge() {
        let c = marginal_lambda1(16, 0.4, 256).unwrap();
        let peak = c.densities.iter().cloned().fold(0.0, f64::max);
        assert!(*c.densities.last().unwrap() < 1e-6 * peak);
    }

    #[test]
    fn agrees_with_integrated_chart_density() {
        let (m, p) = (16, 0.4);
        for measure in [ChartMeasure::Conditional, ChartMeasure::Lebesgue] {
            let curve = marginal(Which::Lambda1, m, p, DEFAULT_RESOLUTION, measure).unwrap();
            let chart = ChartDensity::new(m, p, measure).unwrap();
            // mass of the ordered region under the chart density
            let region = integrate(
                |x| {
                    inner_limits(Which::Lambda1, p, x).map_or(0.0, |(a, b)| {
                        integrate_sqrt_ends(|y| chart.value(x, y), a, b, Tolerance::absolute(1e-12))
                            .unwrap()
                            .value
                    })
                },
                support(Which::Lambda1, p).0,
                support(Which::Lambda1, p).1,
                Tolerance::absolute(1e-12),
            )
            .unwrap()
            .value;
            if measure == ChartMeasure::Conditional {
                // twelve relabelings of the two chart slots tile the chart
                assert!((region * 12.0 - 1.0).abs() < 1e-6, "{region}");
            }
            let peak = curve.densities.iter().cloned().fold(0.0, f64::max);
            for k in [40, 130, 256, 380, 470] {
                let x = curve.abscissas[k];
                let (a, b) = inner_limits(Which::Lambda1, p, x).unwrap();
                let direct = integrate_sqrt_ends(|y| chart.value(x, y), a, b, Tolerance::absolute(1e-13))
                    .unwrap()
                    .value
                    / region;
                assert!(
                    (direct - curve.densities[k]).abs() < 1e-4 * peak,
                    "{measure:?} at {x}: {direct} vs {}",
                    curve.densities[k]
                );
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(marginal_lambda1(3, 0.4, 100).is_err());
        assert!(marginal_lambda1(8, 1.0, 100).is_err());
        assert!(marginal_lambda1(8, 0.4, 2).is_err());
    }
}
