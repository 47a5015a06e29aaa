use rdens_core::analysis::{entropy_distribution_at_fixed_purity, Histogram1D, DEFAULT_BINS};
use rdens_core::marginals::{marginal, Which, DEFAULT_RESOLUTION};
use rdens_core::mcmc::{chart_log_density, max_eigenvalue_at_entropy, run_chains};
use rdens_core::{ChartDensity, ChartMeasure, Constraint, SampleSet, StaticEnsembleSpec};
use serde_json::{json, Value};

use super::{chain_settings, measure, output, surface};
use crate::args::{EntropyDistArgs, MarginalArgs, StaticDensityArgs, StaticSampleArgs};
use crate::config::Resolver;
use crate::error::CliError;
use crate::output::{read_spectra, Cell, Run, Table};

/// Chart density on a `grid × grid` lattice with its statistics.
pub fn density_table(spec: &StaticEnsembleSpec, measure: ChartMeasure, grid: usize) -> Result<(Table, Value), CliError> {
    let mut table = Table::new(&["lambda1", "lambda2", "density"]);
    let stats = match spec.constraint {
        Constraint::Purity { value } => {
            let density = ChartDensity::new(spec.m, value, measure)?;
            let g = density.grid(grid)?;
            let k = g.ys.len();
            for (i, &x) in g.xs.iter().enumerate() {
                for (j, &y) in g.ys.iter().enumerate() {
                    table.push(vec![x.into(), y.into(), g.values[i * k + j].into()]);
                }
            }
            let max = g.values.iter().cloned().fold(0.0, f64::max);
            json!({ "extent": density.extent(), "log_normalization": density.log_normalization(),
                    "normalization": "quadrature", "max_density": max })
        }
        Constraint::Entropy { value, base } => {
            if grid < 2 {
                return Err(rdens_core::Error::InvalidArgument("grid needs at least 2 points per axis".into()).into());
            }
            let extent = max_eigenvalue_at_entropy(4, value, base)?;
            let h = extent / (grid - 1) as f64;
            let axis: Vec<f64> = (0..grid).map(|i| i as f64 * h).collect();
            let logs: Vec<f64> = axis
                .iter()
                .flat_map(|&x| axis.iter().map(move |&y| (x, y)))
                .map(|(x, y)| chart_log_density(spec, measure, &[x, y]))
                .collect();
            let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !top.is_finite() {
                return Err(rdens_core::Error::NumericalFailure("density vanishes on the whole grid".into()).into());
            }
            let raw: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
            let norm = raw.iter().sum::<f64>() * h * h;
            for (i, &x) in axis.iter().enumerate() {
                for (j, &y) in axis.iter().enumerate() {
                    table.push(vec![x.into(), y.into(), (raw[i * grid + j] / norm).into()]);
                }
            }
            json!({ "extent": extent, "normalization": "grid-sum",
                    "max_density": 1.0 / norm })
        }
    };
    Ok((table, stats))
}

pub fn static_density(r: &mut Resolver, args: StaticDensityArgs) -> Result<(), CliError> {
    let spec = surface(r, &args.surface)?;
    let measure = measure(r, args.surface.measure.clone())?;
    let grid = r.or("grid", args.grid, 200)?;
    let (format, out) = output(r, args.output, "static-density")?;
    let run = Run::new("static-density", r.finish()?);
    let (table, stats) = density_table(&spec, measure, grid)?;
    run.write_table(&out, &table, format, stats)?;
    Ok(())
}

pub fn spectra_table(samples: &SampleSet) -> Table {
    let mut table = Table::new(&["lambda1", "lambda2", "lambda3", "lambda4"]);
    for row in samples.rows() {
        table.push(row.iter().map(|&x| Cell::Float(x)).collect());
    }
    table
}

pub fn static_sample(r: &mut Resolver, args: StaticSampleArgs) -> Result<(), CliError> {
    let spec = surface(r, &args.surface)?;
    let measure = measure(r, args.surface.measure.clone())?;
    let chain = chain_settings(r, &args.chain, 10_000)?;
    let (format, out) = output(r, args.output, "static-sample")?;
    let run = Run::new("static-sample", r.finish()?);
    let result = run_chains(&chain.config(spec, measure), chain.chains)?;
    let stats = json!({
        "seed": chain.seed,
        "samples": result.samples.len(),
        "step_sizes": result.step_sizes,
        "acceptance_rate": result.acceptance_rate,
        "burn_in_steps": result.burn_in_steps,
        "rejections": result.rejections,
    });
    run.write_table(&out, &spectra_table(&result.samples), format, stats)?;
    Ok(())
}

pub fn marginal_cmd(r: &mut Resolver, args: MarginalArgs) -> Result<(), CliError> {
    let m = r.required("m", args.m)?;
    let p = r.required("P", args.purity)?;
    let which: Which = r.or("marginal", args.marginal, "lambda1".to_owned())?.parse()?;
    let resolution = r.or("resolution", args.resolution, DEFAULT_RESOLUTION)?;
    let measure = measure(r, args.measure)?;
    let (format, out) = output(r, args.output, "marginal")?;
    let run = Run::new("marginal", r.finish()?);
    let curve = marginal(which, m, p, resolution, measure)?;
    let mut table = Table::new(&["lambda", "density"]);
    table.title = Some(format!("{} m={m} P={p}", which.name()));
    for (&x, &f) in curve.abscissas.iter().zip(&curve.densities) {
        table.push(vec![x.into(), f.into()]);
    }
    let (lo, hi) = curve.support();
    run.write_table(&out, &table, format, json!({ "support": [lo, hi], "mean": curve.mean() }))?;
    Ok(())
}

pub fn entropy_dist(r: &mut Resolver, args: EntropyDistArgs) -> Result<(), CliError> {
    let base = r.or("base", args.base, std::f64::consts::E)?;
    let bins = r.or("bins", args.bins, DEFAULT_BINS)?;
    let reference = r.optional("static", args.reference)?;
    let sampling = match &reference {
        Some(_) => None,
        None => {
            let m = r.required("m", args.m)?;
            let p = r.required("P", args.purity)?;
            let measure = measure(r, args.measure)?;
            let chain = chain_settings(r, &args.chain, 10_000)?;
            Some((StaticEnsembleSpec::purity(4, m, p)?, measure, chain))
        }
    };
    let (format, out) = output(r, args.output, "entropy-dist")?;
    let run = Run::new("entropy-dist", r.finish()?);
    let samples = match (&reference, sampling) {
        (Some(path), _) => read_spectra(path)?.samples,
        (None, Some((spec, measure, chain))) => run_chains(&chain.config(spec, measure), chain.chains)?.samples,
        (None, None) => unreachable!("one source is always resolved"),
    };
    let dist = entropy_distribution_at_fixed_purity(&samples, base)?;
    let lo = dist.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = dist.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.01 * (hi - lo).max(1e-12);
    let hist = Histogram1D::from_values(&dist.values, lo - pad, hi + pad, bins)?;
    let edges = hist.edges();
    let total = hist.total();
    let mut table = Table::new(&["entropy_lo", "entropy_hi", "density"]);
    for (w, &c) in edges.windows(2).zip(&hist.weights) {
        table.push(vec![w[0].into(), w[1].into(), (c / (total * (w[1] - w[0]))).into()]);
    }
    let summary = json!({ "mean": dist.mean, "std": dist.std, "purity_mean": dist.purity_mean,
                          "samples": dist.values.len(), "base": base });
    run.write_table(&out, &table, format, summary.clone())?;
    println!("{summary}");
    Ok(())
}
