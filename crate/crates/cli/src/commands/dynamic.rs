use std::path::PathBuf;

use rdens_core::analysis::{compare_chart, compare_chart_samples, compare_marginal, compare_samples, DEFAULT_BINS};
use rdens_core::dynamics::{run_dynamic_ensemble, DynamicRun, DynamicsSpec, HamiltonianModel, InitialStateSpec, ModelKind};
use rdens_core::ensemble::max_eigenvalue;
use rdens_core::marginals::{marginal, Which, DEFAULT_RESOLUTION};
use rdens_core::ChartDensity;
use serde_json::{json, Value};

use super::{measure, output, DEFAULT_SEED};
use crate::args::{CompareArgs, DynamicArgs};
use crate::config::Resolver;
use crate::error::CliError;
use crate::output::{read_manifest_parameters, read_spectra, to_json_bytes, Cell, Run, Table};

pub const DEFAULT_REALIZATIONS: usize = 1000;

pub fn dynamic_table(run: &DynamicRun) -> Table {
    let mut table = Table::new(&["lambda1", "lambda2", "lambda3", "lambda4", "t_hit", "converged"]);
    for out in &run.outcomes {
        let mut row: Vec<Cell> = out.spectrum.values().iter().map(|&x| Cell::Float(x)).collect();
        row.push(out.t_hit.into());
        row.push(out.converged.into());
        table.push(row);
    }
    table
}

pub fn dynamic_stats(run: &DynamicRun) -> Value {
    json!({
        "t_max": run.t_max,
        "realizations": run.outcomes.len(),
        "discarded": run.discarded(),
        "discard_fraction": run.discard_fraction(),
    })
}

pub fn dynamic(r: &mut Resolver, args: DynamicArgs) -> Result<(), CliError> {
    let kind: ModelKind = r.or("model", args.model, "global".to_owned())?.parse()?;
    let m = r.required("m", args.m)?;
    let eps = match kind {
        ModelKind::Global => r.or("eps", args.eps, 0.0)?,
        _ => r.required("eps", args.eps)?,
    };
    let theta = r.or("theta", args.theta, 0.0)?;
    let p = r.required("P", args.purity)?;
    let n = r.or("N", args.realizations, DEFAULT_REALIZATIONS)?;
    let seed = r.or("seed", args.seed, DEFAULT_SEED)?;
    let t_max = r.optional("t-max", args.t_max)?;
    let (format, out) = output(r, args.output, "dynamic")?;
    let run = Run::new("dynamic", r.finish()?);
    let mut spec = DynamicsSpec::new(HamiltonianModel::new(kind, m, eps)?, p, n, seed);
    spec.initial = InitialStateSpec::new(theta)?;
    spec.t_max = t_max;
    let result = run_dynamic_ensemble(&spec)?;
    run.write_table(&out, &dynamic_table(&result), format, dynamic_stats(&result))?;
    Ok(())
}

pub fn compare(r: &mut Resolver, args: CompareArgs) -> Result<(), CliError> {
    let reference = r.or("static", args.reference, "exact".to_owned())?;
    let dynamic_path: PathBuf = r.required("dynamic", args.dynamic)?;
    let observable = r.or("marginal", args.marginal, "lambda1".to_owned())?;
    let recorded = read_manifest_parameters(&dynamic_path).unwrap_or(Value::Null);
    let exact = reference == "exact";
    let m = r.optional_or("m", args.m, recorded["m"].as_u64().map(|v| v as usize))?;
    let p = r.optional_or("P", args.purity, recorded["P"].as_f64())?;
    let bins = r.or("bins", args.bins, DEFAULT_BINS)?;
    let seed = r.or("seed", args.seed, DEFAULT_SEED)?;
    let (resolution, measure) = if exact {
        (r.or("resolution", args.resolution, DEFAULT_RESOLUTION)?, measure(r, args.measure)?)
    } else {
        (DEFAULT_RESOLUTION, Default::default())
    };
    let out = r.optional("out", args.out)?;
    let run = Run::new("compare", r.finish()?);

    let dynamic = read_spectra(&dynamic_path)?;
    let report = if exact {
        let m = m.ok_or_else(|| CliError::Usage("missing --m".into()))?;
        let p = p.ok_or_else(|| CliError::Usage("missing --P".into()))?;
        if observable == "chart" {
            compare_chart(&ChartDensity::new(m, p, measure)?, &dynamic.samples, bins, seed)?
        } else {
            let which: Which = observable.parse()?;
            compare_marginal(&marginal(which, m, p, resolution, measure)?, &dynamic.samples, bins, seed)?
        }
    } else {
        let other = read_spectra(&PathBuf::from(&reference))?;
        if observable == "chart" {
            let extent = match p {
                Some(p) => max_eigenvalue(4, p),
                None => dynamic.samples.rows().chain(other.samples.rows()).flatten().cloned().fold(0.0, f64::max),
            };
            compare_chart_samples(&dynamic.samples, &other.samples, extent, bins, seed)?
        } else {
            compare_samples(&dynamic.samples, &other.samples, observable.parse()?, bins, seed)?
        }
    };
    let mut body = serde_json::to_value(&report).expect("reports serialize");
    let extra = json!({
        "static": reference,
        "dynamic": dynamic_path.display().to_string(),
        "skipped_unconverged": dynamic.skipped,
        "m": m,
        "P": p,
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut body, extra) {
        map.extend(more);
    }
    let bytes = to_json_bytes(&body);
    print!("{}", String::from_utf8_lossy(&bytes));
    if let Some(out) = out {
        run.write(&out, &bytes, json!({ "excess": report.excess() }))?;
    }
    Ok(())
}
