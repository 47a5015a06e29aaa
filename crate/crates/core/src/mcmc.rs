//! Metropolis random walk on the fixed-purity (or fixed-entropy) surface.
//!
//! The first `n - 2` eigenvalues are moved a distance `ε` in a uniformly
//! random direction, negative coordinates are reflected to their absolute
//! value, and the last two eigenvalues are solved from the constraints. The
//! target is `exp(-E) · J^k` with `E` the log-gas energy and `J^k` the chart
//! measure factor.
//!
//! A second move relabels which eigenvalues play the role of the chart
//! coordinates. Under the conditional measure it is always accepted and lets
//! the walk jump between the equivalent copies of the ordered region, which
//! the random walk alone connects only through narrow necks.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{log_density_of, peak_locations, ChartMeasure, ChartPoint, Constraint, StaticEnsembleSpec};
use crate::error::{Error, Result};
use crate::rng::{substream, SimRng};
use crate::samples::SampleSet;

const TUNE_BLOCK: usize = 1000;
const MAX_BURN_IN_FACTOR: usize = 10;
const ACCEPT_LO: f64 = 0.4;
const ACCEPT_HI: f64 = 0.6;
const START_DISPLACEMENT: f64 = 1e-3;
const ENTROPY_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub spec: StaticEnsembleSpec,
    /// Initial random-walk step; tuned during burn-in.
    pub step_size: f64,
    pub burn_in: usize,
    pub thinning: usize,
    pub total_samples: usize,
    pub seed: u64,
    pub measure: ChartMeasure,
    /// Probability that an iteration is a relabelling move.
    pub relabel_probability: f64,
}

impl ChainConfig {
    pub fn new(spec: StaticEnsembleSpec, total_samples: usize, seed: u64) -> Self {
        Self {
            spec,
            step_size: 0.01,
            burn_in: 10_000,
            thinning: 10,
            total_samples,
            seed,
            measure: ChartMeasure::default(),
            relabel_probability: 0.1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::invalid(format!("step size must be positive, got {}", self.step_size)));
        }
        if self.thinning == 0 {
            return Err(Error::invalid("thinning must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.relabel_probability) {
            return Err(Error::invalid("relabel probability must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Why a proposal was not taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rejection {
    /// Tail eigenvalues would be complex.
    NotRealizable,
    /// Reflection still left a negative recovered eigenvalue.
    Nonphysical,
    /// No tail solves the entropy constraint.
    NoSolution,
    /// Metropolis test failed.
    Metropolis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RejectionCounts {
    pub not_realizable: u64,
    pub nonphysical: u64,
    pub no_solution: u64,
    pub metropolis: u64,
}

impl RejectionCounts {
    fn record(&mut self, r: Rejection) {
        match r {
            Rejection::NotRealizable => self.not_realizable += 1,
            Rejection::Nonphysical => self.nonphysical += 1,
            Rejection::NoSolution => self.no_solution += 1,
            Rejection::Metropolis => self.metropolis += 1,
        }
    }

    fn add(&mut self, o: &RejectionCounts) {
        self.not_realizable += o.not_realizable;
        self.nonphysical += o.nonphysical;
        self.no_solution += o.no_solution;
        self.metropolis += o.metropolis;
    }
}

/// `E = -|m-n| Σ ln λ_i - 2 Σ_{i<j} ln |λ_i - λ_j|`, or `+∞` where the
/// density vanishes.
pub fn potential_energy(lambda: &[f64], m: usize) -> f64 {
    let exponent = m.abs_diff(lambda.len()) as f64;
    let mut e = 0.0;
    for (i, &a) in lambda.iter().enumerate() {
        if exponent != 0.0 {
            if a <= 0.0 {
                return f64::INFINITY;
            }
            e -= exponent * a.ln();
        }
        for &b in &lambda[i + 1..] {
            let d = (a - b).abs();
            if d == 0.0 {
                return f64::INFINITY;
            }
            e -= 2.0 * d.ln();
        }
    }
    e
}

/// Largest eigenvalue of any `n`-level spectrum with entropy `target` in log
/// base `base`: the others are equal, so the entropy is monotone in it.
pub fn max_eigenvalue_at_entropy(n: usize, target: f64, base: f64) -> Result<f64> {
    if n < 2 || !(base > 1.0) {
        return Err(Error::invalid("need n >= 2 and a log base above 1"));
    }
    let nf = n as f64;
    let s = target * base.ln();
    if !(s >= 0.0 && s <= nf.ln() + ENTROPY_RESIDUAL) {
        return Err(Error::invalid(format!("entropy {target} outside [0, log {n}]")));
    }
    let xlnx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    let h = |x: f64| -xlnx(x) - (nf - 1.0) * xlnx((1.0 - x) / (nf - 1.0));
    let (mut lo, mut hi) = (1.0 / nf, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) >= s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `(λ_{n-1}, λ_n)` with `λ_{n-1} + λ_n = 1 - Σ free` and total entropy
/// `target` (in log base `base`), found by bisection in `λ_{n-1}`.
pub fn solve_tail_for_entropy(free: &[f64], target: f64, base: f64) -> Result<(f64, f64)> {
    if free.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::invalid("free eigenvalues must be nonnegative"));
    }
    let r = 1.0 - free.iter().sum::<f64>();
    if !(r > 0.0) {
        return Err(Error::invalid("free eigenvalues must sum to less than 1"));
    }
    let xlnx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    let rest = target * base.ln() + free.iter().map(|&x| xlnx(x)).sum::<f64>();
    let h = |t: f64| -xlnx(t) - xlnx(r - t);
    let (mut lo, mut hi) = (0.0, 0.5 * r);
    let (h_lo, h_hi) = (h(lo), h(hi));
    if rest < h_lo - ENTROPY_RESIDUAL || rest > h_hi + ENTROPY_RESIDUAL {
        return Err(Error::NotRealizable(format!(
            "entropy target unreachable: need {rest}, tail range [{h_lo}, {h_hi}]"
        )));
    }
    if (h_hi - rest).abs() <= ENTROPY_RESIDUAL {
        return Ok((hi, r - hi));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = h(mid);
        if (v - rest).abs() <= ENTROPY_RESIDUAL || hi - lo < f64::EPSILON * r {
            return Ok((mid, r - mid));
        }
        if v < rest {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok((t, r - t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Manifold {
    Purity(f64),
    Entropy { value: f64, base: f64 },
}

impl Manifold {
    fn of(spec: &StaticEnsembleSpec) -> Self {
        match spec.constraint {
            Constraint::Purity { value } => Manifold::Purity(value),
            Constraint::Entropy { value, base } => Manifold::Entropy { value, base },
        }
    }

    fn tail(self, free: &[f64]) -> std::result::Result<(f64, f64), Rejection> {
        match self {
            Manifold::Purity(p) => match ChartPoint::new(free, p) {
                Ok(c) if c.physical => Ok(c.recovered),
                Ok(_) => Err(Rejection::Nonphysical),
                Err(_) => Err(Rejection::NotRealizable),
            },
            Manifold::Entropy { value, base } => {
                if free.iter().sum::<f64>() >= 1.0 {
                    return Err(Rejection::Nonphysical);
                }
                solve_tail_for_entropy(free, value, base).map_err(|_| Rejection::NoSolution)
            }
        }
    }

    /// Natural log of the tail Jacobian, up to an additive constant.
    fn log_jacobian(self, tail: (f64, f64)) -> f64 {
        match self {
            Manifold::Purity(_) => (2.0 * (tail.1 - tail.0)).ln(),
            Manifold::Entropy { .. } => (tail.1.ln() - tail.0.ln()).abs().ln(),
        }
    }
}

fn log_target_of(manifold: Manifold, exponent: f64, power: i32, lambda: &[f64]) -> f64 {
    let k = lambda.len() - 2;
    let tail = (lambda[k], lambda[k + 1]);
    match manifold {
        Manifold::Purity(_) => log_density_of(&lambda[..k], tail, exponent, power),
        Manifold::Entropy { .. } => {
            let plain = log_density_of(&lambda[..k], tail, exponent, 0);
            if power == 0 {
                plain
            } else {
                plain + power as f64 * manifold.log_jacobian(tail)
            }
        }
    }
}

/// Unnormalized log density of the chart coordinates `free` on the surface
/// of `spec`, `-inf` off the physical region. This is the sampler's target.
pub fn chart_log_density(spec: &StaticEnsembleSpec, measure: ChartMeasure, free: &[f64]) -> f64 {
    if free.len() + 2 != spec.n {
        return f64::NEG_INFINITY;
    }
    let manifold = Manifold::of(spec);
    match manifold.tail(free) {
        Ok((a, b)) => {
            let mut lam = free.to_vec();
            lam.push(a);
            lam.push(b);
            log_target_of(manifold, spec.exponent(), measure.jacobian_power(), &lam)
        }
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Current position of a chain: `n - 2` chart coordinates followed by the
/// recovered tail (unordered), its log target and recent acceptances.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub current: Vec<f64>,
    pub log_target: f64,
    pub acceptance_window: VecDeque<bool>,
}

impl ChainState {
    pub fn free(&self) -> &[f64] {
        &self.current[..self.current.len() - 2]
    }

    /// Energy plus the measure term, so that acceptance is `exp(-ΔE_eff)`.
    pub fn effective_energy(&self) -> f64 {
        -self.log_target
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Proposal {
    Candidate(Vec<f64>),
    Rejected(Rejection),
}

/// Random-walk proposal from `state`: chart coordinates displaced by `eps`
/// in a uniform direction, reflected, tail recovered.
pub fn propose_step<R: Rng + ?Sized>(
    state: &ChainState,
    eps: f64,
    rng: &mut R,
    constraint: &Constraint,
) -> Proposal {
    let manifold = match *constraint {
        Constraint::Purity { value } => Manifold::Purity(value),
        Constraint::Entropy { value, base } => Manifold::Entropy { value, base },
    };
    propose(state.free(), eps, rng, manifold)
}

fn propose<R: Rng + ?Sized>(free: &[f64], eps: f64, rng: &mut R, manifold: Manifold) -> Proposal {
    let k = free.len();
    let mut next = Vec::with_capacity(k + 2);
    if k == 2 {
        let phi = rng.random::<f64>() * std::f64::consts::TAU;
        next.push((free[0] + eps * phi.cos()).abs());
        next.push((free[1] + eps * phi.sin()).abs());
    } else {
        let dir: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|d: &f64| d * d).sum::<f64>().sqrt();
        for (x, d) in free.iter().zip(&dir) {
            next.push((x + eps * d / norm).abs());
        }
    }
    match manifold.tail(&next) {
        Ok((a, b)) => {
            next.push(a);
            next.push(b);
            Proposal::Candidate(next)
        }
        Err(r) => Proposal::Rejected(r),
    }
}

/// Result of one or more chains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub samples: SampleSet,
    /// Frozen step size of each chain.
    pub step_sizes: Vec<f64>,
    /// Random-walk acceptance rate during sampling.
    pub acceptance_rate: f64,
    pub burn_in_steps: Vec<usize>,
    pub rejections: RejectionCounts,
}

/// A single chain; stepping is strictly sequential.
pub struct Chain {
    manifold: Manifold,
    exponent: f64,
    power: i32,
    eps: f64,
    relabel_probability: f64,
    state: ChainState,
    rng: SimRng,
    rejections: RejectionCounts,
    walk_moves: u64,
    walk_accepts: u64,
}

impl Chain {
    pub fn new(config: &ChainConfig, rng: SimRng) -> Result<Self> {
        config.validate()?;
        let manifold = Manifold::of(&config.spec);
        let mut chain = Self {
            manifold,
            exponent: config.spec.exponent(),
            power: config.measure.jacobian_power(),
            eps: config.step_size,
            relabel_probability: config.relabel_probability,
            state: ChainState {
                current: Vec::new(),
                log_target: f64::NEG_INFINITY,
                acceptance_window: VecDeque::with_capacity(TUNE_BLOCK),
            },
            rng,
            rejections: RejectionCounts::default(),
            walk_moves: 0,
            walk_accepts: 0,
        };
        let start = chain.start_point(&config.spec)?;
        chain.state.log_target = chain.log_target(&start);
        chain.state.current = start;
        Ok(chain)
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn step_size(&self) -> f64 {
        self.eps
    }

    fn log_target(&self, lambda: &[f64]) -> f64 {
        log_target_of(self.manifold, self.exponent, self.power, lambda)
    }

    /// Degenerate peak displaced by a small fixed offset; falls back to a
    /// random search if that point is not on the physical surface.
    fn start_point(&mut self, spec: &StaticEnsembleSpec) -> Result<Vec<f64>> {
        let k = spec.n - 2;
        let peak = match self.manifold {
            Manifold::Purity(p) => peak_locations(spec.n, p)?.minus,
            Manifold::Entropy { value, base } => entropy_peak(spec.n, value * base.ln()),
        };
        let mut free: Vec<f64> = (0..k).map(|i| peak + START_DISPLACEMENT * (i + 1) as f64).collect();
        for attempt in 0..100_000 {
            if let Ok((a, b)) = self.manifold.tail(&free) {
                let mut lam = free.clone();
                lam.push(a);
                lam.push(b);
                if self.log_target(&lam).is_finite() {
                    return Ok(lam);
                }
            }
            if attempt == 0 && k == 0 {
                break;
            }
            for x in free.iter_mut() {
                *x = self.rng.random::<f64>() / spec.n as f64 * 2.0;
            }
        }
        Err(Error::Configuration(format!(
            "no interior starting point found for {:?}",
            spec.constraint
        )))
    }

    fn metropolis(&mut self, candidate: Vec<f64>, delta_extra: f64) -> bool {
        let lt = self.log_target(&candidate);
        let delta = lt - self.state.log_target + delta_extra;
        let accept = delta >= 0.0 || self.rng.random::<f64>() < delta.exp();
        if accept && lt.is_finite() {
            self.state.current = candidate;
            self.state.log_target = lt;
            true
        } else {
            self.rejections.record(Rejection::Metropolis);
            false
        }
    }

    fn walk(&mut self) -> bool {
        let k = self.state.current.len() - 2;
        let accepted = match propose(&self.state.current[..k], self.eps, &mut self.rng, self.manifold) {
            Proposal::Candidate(c) => self.metropolis(c, 0.0),
            Proposal::Rejected(r) => {
                self.rejections.record(r);
                false
            }
        };
        self.walk_moves += 1;
        if accepted {
            self.walk_accepts += 1;
        }
        if self.state.acceptance_window.len() == TUNE_BLOCK {
            self.state.acceptance_window.pop_front();
        }
        self.state.acceptance_window.push_back(accepted);
        accepted
    }

    /// Uniformly random relabelling of which eigenvalues are chart
    /// coordinates.
    fn relabel(&mut self) {
        let n = self.state.current.len();
        let mut perm = self.state.current.clone();
        for i in (1..n).rev() {
            let j = self.rng.random_range(0..=i);
            perm.swap(i, j);
        }
        if perm[n - 2] > perm[n - 1] {
            perm.swap(n - 2, n - 1);
        }
        let old = (self.state.current[n - 2], self.state.current[n - 1]);
        let new = (perm[n - 2], perm[n - 1]);
        // relabelling preserves the conditional measure, so the ratio is
        // J'^(k+1) / J^(k+1), identically one when k = -1
        let k1 = self.power + 1;
        let log_ratio = if k1 == 0 {
            0.0
        } else {
            k1 as f64 * (self.manifold.log_jacobian(new) - self.manifold.log_jacobian(old))
        };
        let accept = log_ratio >= 0.0 || self.rng.random::<f64>() < log_ratio.exp();
        if accept {
            let lt = self.log_target(&perm);
            if lt.is_finite() {
                self.state.current = perm;
                self.state.log_target = lt;
            }
        }
    }

    pub fn step(&mut self) {
        if self.state.current.len() <= 2 {
            return;
        }
        if self.relabel_probability > 0.0 && self.rng.random::<f64>() < self.relabel_probability {
            self.relabel();
        } else {
            self.walk();
        }
    }

    fn window_rate(&self) -> f64 {
        let w = &self.state.acceptance_window;
        if w.is_empty() {
            return 0.0;
        }
        w.iter().filter(|&&a| a).count() as f64 / w.len() as f64
    }

    /// Burn-in with step-size tuning. Returns the number of steps used.
    pub fn burn_in(&mut self, steps: usize) -> Result<usize> {
        if self.state.current.len() <= 2 {
            return Ok(0);
        }
        let budget = steps.max(TUNE_BLOCK) * MAX_BURN_IN_FACTOR;
        let mut done = 0;
        let mut since_tune = 0;
        loop {
            let before = self.walk_moves;
            self.step();
            done += 1;
            since_tune += (self.walk_moves - before) as usize;
            if since_tune >= TUNE_BLOCK {
                since_tune = 0;
                let rate = self.window_rate();
                let in_band = (ACCEPT_LO..=ACCEPT_HI).contains(&rate);
                if done >= steps && in_band {
                    break;
                }
                if rate > ACCEPT_HI {
                    self.eps = (self.eps * 1.1).min(1.0);
                } else if rate < ACCEPT_LO {
                    self.eps *= 0.9;
                }
            }
            if done >= budget {
                return Err(Error::Configuration(format!(
                    "acceptance rate {:.3} not in [{ACCEPT_LO}, {ACCEPT_HI}] after {done} burn-in steps (step size {:.3e})",
                    self.window_rate(),
                    self.eps
                )));
            }
        }
        self.walk_moves = 0;
        self.walk_accepts = 0;
        self.rejections = RejectionCounts::default();
        Ok(done)
    }

    /// Current spectrum, ascending.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.state.current.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Spectrum of a degenerate surface (`P = 1/n`, `P = 1`, or `n = 2`) if the
/// constraint pins it completely.
fn pinned_spectrum(spec: &StaticEnsembleSpec) -> Option<Vec<f64>> {
    let n = spec.n;
    let nf = n as f64;
    let tol = 1e-12;
    let (lowest, highest) = match spec.constraint {
        Constraint::Purity { value } => ((value - 1.0 / nf).abs() < tol, (value - 1.0).abs() < tol),
        Constraint::Entropy { value, base } => {
            let nats = value * base.ln();
            ((nats - nf.ln()).abs() < tol, nats.abs() < tol)
        }
    };
    if lowest {
        return Some(vec![1.0 / nf; n]);
    }
    if highest {
        let mut v = vec![0.0; n];
        v[n - 1] = 1.0;
        return Some(v);
    }
    if n == 2 {
        let t = match spec.constraint {
            Constraint::Purity { value } => ChartPoint::new(&[], value).ok()?.recovered,
            Constraint::Entropy { value, base } => solve_tail_for_entropy(&[], value, base).ok()?,
        };
        return Some(vec![t.0, t.1]);
    }
    None
}

/// `Λ` with `n - 1` eigenvalues equal to `Λ` and entropy `nats`.
fn entropy_peak(n: usize, nats: f64) -> f64 {
    let nf = n as f64;
    let xlnx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    let s = |l: f64| -(nf - 1.0) * xlnx(l) - xlnx(1.0 - (nf - 1.0) * l);
    let (mut lo, mut hi) = (0.0, 1.0 / nf);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if s(mid) < nats {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Runs one chain seeded from `(seed, 0)`.
pub fn run_chain(config: &ChainConfig) -> Result<ChainRun> {
    run_chains(config, 1)
}

/// Runs `chains` independent chains in parallel on streams `(seed, c)`, each
/// with its own burn-in, and concatenates their samples in chain order.
pub fn run_chains(config: &ChainConfig, chains: usize) -> Result<ChainRun> {
    config.validate()?;
    if chains == 0 {
        return Err(Error::invalid("need at least one chain"));
    }
    let n = config.spec.n;
    if let Some(point) = pinned_spectrum(&config.spec) {
        let mut samples = SampleSet::with_capacity(n, config.total_samples);
        for _ in 0..config.total_samples {
            samples.push_sorted(&point);
        }
        return Ok(ChainRun {
            samples,
            step_sizes: vec![0.0; chains],
            acceptance_rate: 1.0,
            burn_in_steps: vec![0; chains],
            rejections: RejectionCounts::default(),
        });
    }
    let per_chain: Vec<usize> = (0..chains)
        .map(|c| config.total_samples / chains + usize::from(c < config.total_samples % chains))
        .collect();
    let runs: Vec<Result<(SampleSet, f64, usize, u64, u64, RejectionCounts)>> = per_chain
        .par_iter()
        .enumerate()
        .map(|(c, &count)| {
            let mut chain = Chain::new(config, substream(config.seed, c as u64))?;
            let used = chain.burn_in(config.burn_in)?;
            let mut samples = SampleSet::with_capacity(n, count);
            for _ in 0..count {
                for _ in 0..config.thinning {
                    chain.step();
                }
                samples.push_sorted(&chain.sorted());
            }
            Ok((samples, chain.eps, used, chain.walk_moves, chain.walk_accepts, chain.rejections))
        })
        .collect();
    let mut out = ChainRun {
        samples: SampleSet::with_capacity(n, config.total_samples),
        step_sizes: Vec::with_capacity(chains),
        acceptance_rate: 0.0,
        burn_in_steps: Vec::with_capacity(chains),
        rejections: RejectionCounts::default(),
    };
    let (mut moves, mut accepts) = (0u64, 0u64);
    for run in runs {
        let (samples, eps, used, mv, acc, rej) = run?;
        out.samples.extend(&samples);
        out.step_sizes.push(eps);
        out.burn_in_steps.push(used);
        moves += mv;
        accepts += acc;
        out.rejections.add(&rej);
    }
    out.acceptance_rate = if moves == 0 { 1.0 } else { accepts as f64 / moves as f64 };
    Ok(out)
}
