//! Data files for the six reference figures:
//!
//! 1. chart density at `P = 0.4` for `m = 16` and `m = 4`, with the node and
//!    boundary conics and the stationary points;
//! 2. global model against the exact `λ₁`, `λ₂` marginals, `P ∈ {0.4, 0.8}`,
//!    `m ∈ {8, 16}`;
//! 3. coupling model, `m = 8`, `P ∈ {0.4, 0.8}`, `ε ∈ {0.01, 0.1, 1}`;
//! 4. spectator and common environment at `P = 0.8`, `m = 8`, for four
//!    central-state angles;
//! 5. Kolmogorov distance table over models, `m ∈ {8, 16}`;
//! 6. chart density at fixed entropy `S = 1.5` bits, `m = 8`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::path::{Path, PathBuf};

use rdens_core::analysis::{compare_marginal, Histogram1D, DEFAULT_BINS};
use rdens_core::conics::{boundary_conics, stationary_points, ConicLabel};
use rdens_core::dynamics::{run_dynamic_ensemble, DynamicsSpec, HamiltonianModel, InitialStateSpec, ModelKind};
use rdens_core::marginals::{marginal, MarginalCurve, Which, DEFAULT_RESOLUTION};
use rdens_core::{ChartMeasure, StaticEnsembleSpec};
use serde_json::json;

use super::dynamic::dynamic_stats;
use super::statics::density_table;
use super::DEFAULT_SEED;
use crate::args::FigureArgs;
use crate::config::Resolver;
use crate::error::CliError;
use crate::output::{Cell, Format, Run, Table};

const FIGURE_REALIZATIONS: usize = 2000;
const CONIC_POINTS: usize = 256;
const DENSITY_PURITY: f64 = 0.4;
const ENTROPY_TARGET: f64 = 1.5;
const ENTROPY_BASE: f64 = 2.0;

struct Case {
    kind: ModelKind,
    m: usize,
    eps: f64,
    theta: f64,
    purity: f64,
    /// File-name stem.
    label: String,
}

impl Case {
    fn new(kind: ModelKind, m: usize, eps: f64, theta: f64, purity: f64, tag: &str) -> Self {
        let label = format!("{}_m{m}_P{purity}{tag}", kind.name());
        Self { kind, m, eps, theta, purity, label }
    }
}

const THETAS: [(f64, &str); 4] = [(0.0, "0"), (0.2, "0.2"), (FRAC_PI_8, "pi8"), (FRAC_PI_4, "pi4")];

fn cases(figure: u8, purity: f64) -> Vec<Case> {
    let mut out = Vec::new();
    match figure {
        2 => {
            for p in [0.4, 0.8] {
                for m in [8, 16] {
                    out.push(Case::new(ModelKind::Global, m, 0.0, 0.0, p, ""));
                }
            }
        }
        3 => {
            for p in [0.4, 0.8] {
                for eps in [0.01, 0.1, 1.0] {
                    out.push(Case::new(ModelKind::Coupling, 8, eps, 0.0, p, &format!("_eps{eps}")));
                }
            }
        }
        4 => {
            for kind in [ModelKind::Spectator, ModelKind::Common] {
                for (theta, tag) in THETAS {
                    out.push(Case::new(kind, 8, 1.0, theta, 0.8, &format!("_theta{tag}")));
                }
            }
        }
        5 => {
            for m in [8, 16] {
                out.push(Case::new(ModelKind::Global, m, 0.0, 0.0, purity, ""));
                for eps in [0.01, 0.1, 1.0] {
                    out.push(Case::new(ModelKind::Coupling, m, eps, 0.0, purity, &format!("_eps{eps}")));
                }
                for kind in [ModelKind::Spectator, ModelKind::Common] {
                    for (theta, tag) in [THETAS[0], THETAS[3]] {
                        out.push(Case::new(kind, m, 1.0, theta, purity, &format!("_theta{tag}")));
                    }
                }
            }
        }
        _ => {}
    }
    out
}

/// Per-case seed, well separated from the seeds of the other cases.
fn case_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

struct DynamicSettings {
    realizations: usize,
    seed: u64,
    bins: usize,
    resolution: usize,
}

fn curve_table(curve: &MarginalCurve) -> Table {
    let mut table = Table::new(&["lambda", "density"]);
    table.title = Some(format!("{} m={} P={}", curve.which.name(), curve.m, curve.purity));
    for (&x, &f) in curve.abscissas.iter().zip(&curve.densities) {
        table.push(vec![x.into(), f.into()]);
    }
    table
}

fn histogram_table(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Table, CliError> {
    let hist = Histogram1D::from_values(values, lo, hi, bins)?;
    let total = values.len().max(1) as f64;
    let mut table = Table::new(&["lo", "hi", "density"]);
    for (w, &c) in hist.edges().windows(2).zip(&hist.weights) {
        table.push(vec![w[0].into(), w[1].into(), (c / (total * (w[1] - w[0]))).into()]);
    }
    Ok(table)
}

/// Runs every case, compares it with the exact marginals and writes the
/// summary table. Per-case curves and histograms are written when
/// `per_case` is set.
fn run_cases(
    run: &Run,
    dir: &Path,
    format: Format,
    cases: &[Case],
    settings: &DynamicSettings,
    per_case: bool,
) -> Result<(), CliError> {
    let ext = format.ext();
    let mut curves: HashMap<(Which, usize, u64), MarginalCurve> = HashMap::new();
    let mut summary = Table::new(&[
        "model", "m", "eps", "theta", "P", "observable", "K", "error_bar", "samples", "discarded",
    ]);
    for (i, case) in cases.iter().enumerate() {
        let mut spec = DynamicsSpec::new(
            HamiltonianModel::new(case.kind, case.m, case.eps)?,
            case.purity,
            settings.realizations,
            case_seed(settings.seed, i),
        );
        spec.initial = InitialStateSpec::new(case.theta)?;
        let result = run_dynamic_ensemble(&spec)?;
        let samples = result.samples();
        for which in [Which::Lambda1, Which::Lambda2] {
            let key = (which, case.m, case.purity.to_bits());
            if !curves.contains_key(&key) {
                let curve = marginal(which, case.m, case.purity, settings.resolution, ChartMeasure::default())?;
                if per_case {
                    let path = dir.join(format!("exact_{}_m{}_P{}.{ext}", which.name(), case.m, case.purity));
                    run.write_table(&path, &curve_table(&curve), format, json!({ "mean": curve.mean() }))?;
                }
                curves.insert(key, curve);
            }
            let curve = &curves[&key];
            let report = compare_marginal(curve, &samples, settings.bins, spec.seed)?;
            if per_case {
                let (lo, hi) = curve.support();
                let table = histogram_table(&samples.column(which.index()), lo, hi, settings.bins)?;
                let mut stats = dynamic_stats(&result);
                stats["seed"] = json!(spec.seed);
                stats["report"] = serde_json::to_value(&report).expect("reports serialize");
                run.write_table(&dir.join(format!("{}_{}.{ext}", case.label, which.name())), &table, format, stats)?;
            }
            summary.push(vec![
                case.kind.name().into(),
                Cell::Int(case.m as i64),
                case.eps.into(),
                case.theta.into(),
                case.purity.into(),
                which.name().into(),
                report.kolmogorov_distance.into(),
                report.error_bar.into(),
                Cell::Int(report.samples as i64),
                Cell::Int(result.discarded() as i64),
            ]);
        }
    }
    run.write_table(&dir.join(format!("summary.{ext}")), &summary, format, json!({ "cases": cases.len() }))
}

fn figure_density(run: &Run, dir: &Path, format: Format, grid: usize, points: usize) -> Result<(), CliError> {
    let ext = format.ext();
    for m in [16, 4] {
        let spec = StaticEnsembleSpec::purity(4, m, DENSITY_PURITY)?;
        let (table, stats) = density_table(&spec, ChartMeasure::default(), grid)?;
        run.write_table(&dir.join(format!("density_m{m}.{ext}")), &table, format, stats)?;
    }
    let mut table = Table::new(&["curve", "x", "y"]);
    let conics = boundary_conics(DENSITY_PURITY)?;
    for c in conics.iter().filter(|c| c.label != ConicLabel::Outer) {
        let name = format!("{:?}", c.label);
        let count = if c.is_degenerate() { 1 } else { points };
        for k in 0..=count {
            let t = std::f64::consts::TAU * k as f64 / count as f64;
            let p = c.point(t);
            table.push(vec![Cell::Text(name.clone()), p[0].into(), p[1].into()]);
        }
    }
    run.write_table(&dir.join(format!("conics.{ext}")), &table, format, serde_json::to_value(&conics).expect("conics serialize"))?;
    let mut table = Table::new(&["kind", "x", "y", "physical", "interior"]);
    let points = stationary_points(DENSITY_PURITY)?;
    for s in &points {
        let kind = serde_json::to_value(s.kind).expect("kinds serialize");
        table.push(vec![
            Cell::Text(kind.as_str().unwrap_or_default().to_owned()),
            s.point[0].into(),
            s.point[1].into(),
            s.physical.into(),
            s.interior.into(),
        ]);
    }
    run.write_table(&dir.join(format!("stationary.{ext}")), &table, format, json!({ "points": points.len() }))
}

fn figure_entropy(run: &Run, dir: &Path, format: Format, grid: usize) -> Result<(), CliError> {
    let spec = StaticEnsembleSpec::entropy_with_base(4, 8, ENTROPY_TARGET, ENTROPY_BASE)?;
    let (table, mut stats) = density_table(&spec, ChartMeasure::default(), grid)?;
    stats["entropy"] = json!(ENTROPY_TARGET);
    stats["base"] = json!(ENTROPY_BASE);
    run.write_table(&dir.join(format!("density_S{ENTROPY_TARGET}_m8.{}", format.ext())), &table, format, stats)
}

pub fn reproduce(r: &mut Resolver, args: FigureArgs) -> Result<(), CliError> {
    let figure = args.figure;
    let format = Format::parse(&r.or("format", args.format, "csv".to_owned())?)?;
    let dir: PathBuf = r.or("out", args.out, PathBuf::from(format!("fig{figure}")))?;
    let mut unused = Vec::new();
    let mut reject = |name: &str, given: bool| {
        if given {
            unused.push(format!("--{name}"));
        }
    };
    let (grid, dynamics, purity) = match figure {
        1 | 6 => {
            reject("N", args.realizations.is_some());
            reject("seed", args.seed.is_some());
            reject("bins", args.bins.is_some());
            reject("P", args.purity.is_some());
            if figure == 6 {
                reject("resolution", args.resolution.is_some());
            }
            let grid = r.or("grid", args.grid, 200)?;
            let points = if figure == 1 { r.or("resolution", args.resolution, CONIC_POINTS)? } else { 0 };
            (Some((grid, points)), None, None)
        }
        _ => {
            reject("grid", args.grid.is_some());
            if figure != 5 {
                reject("P", args.purity.is_some());
            }
            let settings = DynamicSettings {
                realizations: r.or("N", args.realizations, FIGURE_REALIZATIONS)?,
                seed: r.or("seed", args.seed, DEFAULT_SEED)?,
                bins: r.or("bins", args.bins, DEFAULT_BINS)?,
                resolution: r.or("resolution", args.resolution, DEFAULT_RESOLUTION)?,
            };
            let purity = if figure == 5 { Some(r.or("P", args.purity, 0.8)?) } else { None };
            (None, Some(settings), purity)
        }
    };
    if !unused.is_empty() {
        return Err(CliError::Usage(format!("figure {figure} does not use {}", unused.join(", "))));
    }
    let mut run = Run::new("reproduce-figure", r.finish()?);
    run.positional = Some(figure.to_string());
    match (figure, grid, dynamics) {
        (1, Some((grid, points)), _) => figure_density(&run, &dir, format, grid, points),
        (6, Some((grid, _)), _) => figure_entropy(&run, &dir, format, grid),
        (5, _, Some(settings)) => run_cases(&run, &dir, format, &cases(5, purity.unwrap_or(0.8)), &settings, false),
        (_, _, Some(settings)) => run_cases(&run, &dir, format, &cases(figure, 0.0), &settings, true),
        _ => unreachable!("settings match the figure"),
    }
}
