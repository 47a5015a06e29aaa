use std::path::Path;

use rdens_core::simplex::{project_spectrum, region_mask, sphere_radius, trace_region_curves, CurveKind};
use serde_json::json;

use super::output;
use crate::args::ProjectArgs;
use crate::config::Resolver;
use crate::error::CliError;
use crate::output::{read_spectra, sibling, Cell, Format, Run, Table};

pub fn curve_name(kind: CurveKind) -> String {
    // 1-based eigenvalue indices
    match kind {
        CurveKind::Face(i) => format!("face-{}", i + 1),
        CurveKind::Node(i, j) => format!("node-{}-{}", i + 1, j + 1),
    }
}

/// Mask at `out`, curves next to it, and projected spectra when a sample
/// file is given.
pub fn write_projection(
    run: &Run,
    out: &Path,
    format: Format,
    purity: f64,
    grid: usize,
    resolution: usize,
    spectra: Option<&Path>,
) -> Result<(), CliError> {
    let radius = sphere_radius(purity)?;
    let mask = region_mask(purity, grid)?;
    let mut table = Table::new(&["x", "y", "physical", "ordered"]);
    for c in &mask {
        table.push(vec![c.x.into(), c.y.into(), c.physical.into(), c.ordered.into()]);
    }
    let physical = mask.iter().filter(|c| c.physical).count();
    let stats = json!({ "radius": radius, "cells": mask.len(), "physical_cells": physical,
                        "physical_fraction": physical as f64 / mask.len().max(1) as f64 });
    run.write_table(out, &table, format, stats)?;

    let curves = trace_region_curves(purity, resolution)?;
    let mut table = Table::new(&["curve", "x", "y", "physical"]);
    for c in &curves {
        let name = curve_name(c.kind);
        for (p, &ok) in c.points.iter().zip(&c.physical) {
            table.push(vec![Cell::Text(name.clone()), p[0].into(), p[1].into(), ok.into()]);
        }
    }
    run.write_table(&sibling(out, "curves", format.ext()), &table, format, json!({ "curves": curves.len() }))?;

    if let Some(path) = spectra {
        let samples = read_spectra(path)?.samples;
        let mut table = Table::new(&["x", "y"]);
        for row in samples.rows() {
            let p = project_spectrum(&[row[0], row[1], row[2], row[3]]);
            table.push(vec![p[0].into(), p[1].into()]);
        }
        run.write_table(&sibling(out, "points", format.ext()), &table, format, json!({ "points": samples.len() }))?;
    }
    Ok(())
}

pub fn project(r: &mut Resolver, args: ProjectArgs) -> Result<(), CliError> {
    let p = r.required("P", args.purity)?;
    let grid = r.or("grid", args.grid, 200)?;
    let resolution = r.or("resolution", args.resolution, 256)?;
    let spectra = r.optional("static", args.reference)?;
    let (format, out) = output(r, args.output, "project")?;
    let run = Run::new("project", r.finish()?);
    write_projection(&run, &out, format, p, grid, resolution, spectra.as_deref())
}
