//! Histograms, Kolmogorov distances and sampling error bars.
//!
//! All comparisons are made on bin masses: the Kolmogorov distance of two
//! binned distributions is half the sum of absolute mass differences.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::ChartDensity;
use crate::error::{Error, Result};
use crate::marginals::{MarginalCurve, Which};
use crate::quantum::{purity, von_neumann_entropy};
use crate::rng::{substream, AUX_STREAM_BASE};
use crate::samples::SampleSet;

pub const DEFAULT_BINS: usize = 50;
const ORDERED: &str = "ordered";
const SYMMETRIZED: &str = "symmetrized-chart";

pub const DEFAULT_REPLICATES: usize = 8;
/// Samples this close outside the range are counted in the edge bin.
const EDGE_SLACK: f64 = 1e-9;

fn bin_of(lo: f64, hi: f64, bins: usize, x: f64) -> Option<usize> {
    let slack = EDGE_SLACK * (hi - lo).max(1.0);
    if !(x >= lo - slack && x <= hi + slack) {
        return None;
    }
    let k = ((x - lo) / (hi - lo) * bins as f64).floor();
    Some((k.max(0.0) as usize).min(bins - 1))
}

/// Uniform histogram on `[lo, hi]` with weighted entries. Entries outside the
/// range are kept as overflow weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram1D {
    pub lo: f64,
    pub hi: f64,
    pub weights: Vec<f64>,
    pub overflow: f64,
}

impl Histogram1D {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
        }
        Ok(Self { lo, hi, weights: vec![0.0; bins], overflow: 0.0 })
    }

    pub fn from_values(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        let mut h = Self::new(lo, hi, bins)?;
        for &v in values {
            h.add(v, 1.0);
        }
        Ok(h)
    }

    pub fn bins(&self) -> usize {
        self.weights.len()
    }

    pub fn edges(&self) -> Vec<f64> {
        let b = self.bins();
        (0..=b).map(|i| self.lo + (self.hi - self.lo) * i as f64 / b as f64).collect()
    }

    pub fn add(&mut self, x: f64, weight: f64) {
        match bin_of(self.lo, self.hi, self.bins(), x) {
            Some(k) => self.weights[k] += weight,
            None => self.overflow += weight,
        }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.overflow
    }

    /// Bin masses followed by the overflow mass.
    pub fn masses(&self) -> Vec<f64> {
        let total = self.total();
        let mut out: Vec<f64> = self.weights.iter().map(|w| w / total).collect();
        out.push(self.overflow / total);
        out
    }
}

/// Uniform 2D histogram on `[x0, x1] × [y0, y1]`, row-major in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2D {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub bins: usize,
    pub weights: Vec<f64>,
    pub overflow: f64,
}

impl Histogram2D {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), bins: usize) -> Result<Self> {
        Histogram1D::new(x_range.0, x_range.1, bins)?;
        Histogram1D::new(y_range.0, y_range.1, bins)?;
        Ok(Self { x_range, y_range, bins, weights: vec![0.0; bins * bins], overflow: 0.0 })
    }

    pub fn add(&mut self, x: f64, y: f64, weight: f64) {
        let b = self.bins;
        match (bin_of(self.x_range.0, self.x_range.1, b, x), bin_of(self.y_range.0, self.y_range.1, b, y)) {
            (Some(i), Some(j)) => self.weights[i * b + j] += weight,
            _ => self.overflow += weight,
        }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.overflow
    }

    /// Cell masses followed by the overflow mass.
    pub fn masses(&self) -> Vec<f64> {
        let total = self.total();
        let mut out: Vec<f64> = self.weights.iter().map(|w| w / total).collect();
        out.push(self.overflow / total);
        out
    }

    /// Symmetrized chart histogram of four-level spectra: every ordered pair
    /// of distinct eigenvalues of a sample gets weight 1/12.
    pub fn chart(samples: &SampleSet, extent: f64, bins: usize) -> Result<Self> {
        if samples.dim() != 4 {
            return Err(Error::invalid("chart histograms need four-level spectra"));
        }
        let mut h = Self::new((0.0, extent), (0.0, extent), bins)?;
        for row in samples.rows() {
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        h.add(row[i], row[j], 1.0 / 12.0);
                    }
                }
            }
        }
        Ok(h)
    }
}

/// Half the L1 distance between two mass vectors.
pub fn kolmogorov_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!("mass vectors differ in length: {} vs {}", p.len(), q.len())));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Kolmogorov distance of two densities tabulated on a common uniform grid
/// with spacing `h`.
pub fn kolmogorov_distance_densities(f: &[f64], g: &[f64], h: f64) -> Result<f64> {
    Ok(kolmogorov_distance(f, g)? * h)
}

/// Mean distance between `reference` and the empirical masses of `n` draws
/// from it, over `replicates` independent replicates.
pub fn sampling_error_bar(reference: &[f64], n: usize, replicates: usize, seed: u64) -> Result<f64> {
    if n == 0 || replicates == 0 {
        return Err(Error::invalid("error bar needs n >= 1 and at least one replicate"));
    }
    let total: f64 = reference.iter().sum();
    if !(total > 0.0) || reference.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::invalid("reference masses must be nonnegative with positive sum"));
    }
    let mut cumulative = Vec::with_capacity(reference.len());
    let mut acc = 0.0;
    for &p in reference {
        acc += p / total;
        cumulative.push(acc);
    }
    let normalized: Vec<f64> = reference.iter().map(|p| p / total).collect();
    let distances = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, AUX_STREAM_BASE + r as u64);
            let mut counts = vec![0.0; reference.len()];
            for _ in 0..n {
                let u: f64 = rng.random::<f64>() * acc;
                let k = cumulative.partition_point(|&c| c <= u).min(reference.len() - 1);
                counts[k] += 1.0;
            }
            let empirical: Vec<f64> = counts.iter().map(|c| c / n as f64).collect();
            kolmogorov_distance(&normalized, &empirical)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(distances.iter().sum::<f64>() / replicates as f64)
}

/// Result of comparing an empirical ensemble against a reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `lambda1`, `lambda2` or `chart`.
    pub observable: String,
    /// `ordered` for sorted eigenvalues, `symmetrized-chart` for the
    /// unordered pair of chart coordinates.
    pub convention: String,
    pub kolmogorov_distance: f64,
    pub error_bar: f64,
    pub bins: usize,
    pub samples: usize,
    pub support: (f64, f64),
}

impl ComparisonReport {
    /// Distance minus error bar, i.e. how far beyond sampling noise the
    /// ensembles differ.
    pub fn excess(&self) -> f64 {
        self.kolmogorov_distance - self.error_bar
    }
}

/// Sorted-eigenvalue histogram against an exact marginal on its support.
pub fn compare_marginal(curve: &MarginalCurve, samples: &SampleSet, bins: usize, seed: u64) -> Result<ComparisonReport> {
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble("no samples to compare".into()));
    }
    if samples.dim() != 4 {
        return Err(Error::invalid("marginal comparison needs four-level spectra"));
    }
    let (lo, hi) = curve.support();
    let hist = Histogram1D::from_values(&samples.column(curve.which.index()), lo, hi, bins)?;
    let edges = hist.edges();
    let mut reference: Vec<f64> = edges.windows(2).map(|w| curve.mass(w[0], w[1])).collect();
    reference.push(0.0);
    let k = kolmogorov_distance(&reference, &hist.masses())?;
    let error_bar = sampling_error_bar(&reference, samples.len(), DEFAULT_REPLICATES, seed)?;
    Ok(ComparisonReport {
        observable: curve.which.name().to_string(),
        convention: ORDERED.into(),
        kolmogorov_distance: k,
        error_bar,
        bins,
        samples: samples.len(),
        support: (lo, hi),
    })
}

/// Exact cell masses of the chart density on a `bins × bins` grid over
/// `[0, extent]²`, followed by a zero overflow entry.
pub fn chart_masses(density: &ChartDensity, bins: usize) -> Result<Vec<f64>> {
    let extent = density.extent();
    let edge = |i: usize| extent * i as f64 / bins as f64;
    let cells: Vec<(usize, usize)> = (0..bins).flat_map(|i| (0..bins).map(move |j| (i, j))).collect();
    let mut masses = cells
        .par_iter()
        .map(|&(i, j)| density.mass(edge(i), edge(i + 1), edge(j), edge(j + 1)))
        .collect::<Result<Vec<f64>>>()?;
    masses.push(0.0);
    Ok(masses)
}

/// Symmetrized chart histogram against exact chart cell masses.
pub fn compare_chart(density: &ChartDensity, samples: &SampleSet, bins: usize, seed: u64) -> Result<ComparisonReport> {
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble("no samples to compare".into()));
    }
    let reference = chart_masses(density, bins)?;
    compare_chart_with(&reference, density.extent(), samples, bins, seed)
}

/// Like [`compare_chart`] with precomputed reference masses.
pub fn compare_chart_with(
    reference: &[f64],
    extent: f64,
    samples: &SampleSet,
    bins: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    let hist = Histogram2D::chart(samples, extent, bins)?;
    let k = kolmogorov_distance(reference, &hist.masses())?;
    let error_bar = sampling_error_bar(reference, samples.len(), DEFAULT_REPLICATES, seed)?;
    Ok(ComparisonReport {
        observable: "chart".into(),
        convention: SYMMETRIZED.into(),
        kolmogorov_distance: k,
        error_bar,
        bins,
        samples: samples.len(),
        support: (0.0, extent),
    })
}

/// Symmetrized chart histograms of two empirical ensembles over
/// `[0, extent]²`, with the pooled histogram as error-bar reference.
pub fn compare_chart_samples(a: &SampleSet, b: &SampleSet, extent: f64, bins: usize, seed: u64) -> Result<ComparisonReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyEnsemble("no samples to compare".into()));
    }
    let ha = Histogram2D::chart(a, extent, bins)?;
    let hb = Histogram2D::chart(b, extent, bins)?;
    let k = kolmogorov_distance(&ha.masses(), &hb.masses())?;
    let mut pooled: Vec<f64> = ha.weights.iter().zip(&hb.weights).map(|(p, q)| p + q).collect();
    pooled.push(ha.overflow + hb.overflow);
    let error_bar = sampling_error_bar(&pooled, a.len().min(b.len()), DEFAULT_REPLICATES, seed)?;
    Ok(ComparisonReport {
        observable: "chart".into(),
        convention: SYMMETRIZED.into(),
        kolmogorov_distance: k,
        error_bar,
        bins,
        samples: a.len().min(b.len()),
        support: (0.0, extent),
    })
}

/// Two empirical ensembles on the common range of one sorted eigenvalue. The
/// error bar uses the pooled histogram as reference and the smaller size.
pub fn compare_samples(a: &SampleSet, b: &SampleSet, which: Which, bins: usize, seed: u64) -> Result<ComparisonReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyEnsemble("no samples to compare".into()));
    }
    if a.dim() != b.dim() {
        return Err(Error::invalid("sample sets differ in dimension"));
    }
    let (xa, xb) = (a.column(which.index()), b.column(which.index()));
    let lo = xa.iter().chain(&xb).cloned().fold(f64::INFINITY, f64::min);
    let mut hi = xa.iter().chain(&xb).cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1e-12;
    }
    let ha = Histogram1D::from_values(&xa, lo, hi, bins)?;
    let hb = Histogram1D::from_values(&xb, lo, hi, bins)?;
    let k = kolmogorov_distance(&ha.masses(), &hb.masses())?;
    let pooled: Vec<f64> = ha.weights.iter().zip(&hb.weights).map(|(p, q)| p + q).collect();
    let error_bar = sampling_error_bar(&pooled, a.len().min(b.len()), DEFAULT_REPLICATES, seed)?;
    Ok(ComparisonReport {
        observable: which.name().to_string(),
        convention: ORDERED.into(),
        kolmogorov_distance: k,
        error_bar,
        bins,
        samples: a.len().min(b.len()),
        support: (lo, hi),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyDistribution {
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub purity_mean: f64,
}

/// Entropies of a fixed-purity sample set and their spread.
pub fn entropy_distribution_at_fixed_purity(samples: &SampleSet, base: f64) -> Result<EntropyDistribution> {
    if samples.len() < 2 {
        return Err(Error::EmptyEnsemble("entropy spread needs at least two samples".into()));
    }
    if !(base > 1.0) {
        return Err(Error::invalid(format!("entropy base must exceed 1, got {base}")));
    }
    let values: Vec<f64> = samples.rows().map(|r| von_neumann_entropy(r, base)).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let purity_mean = samples.rows().map(purity).sum::<f64>() / n;
    Ok(EntropyDistribution { values, mean, std: var.sqrt(), purity_mean })
}
