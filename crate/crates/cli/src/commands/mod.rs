use std::path::PathBuf;

use rdens_core::{ChartMeasure, StaticEnsembleSpec};

use crate::args::{ChainArgs, OutputArgs, SurfaceArgs};
use crate::config::Resolver;
use crate::error::CliError;
use crate::output::Format;

pub mod dynamic;
pub mod figures;
pub mod project;
pub mod statics;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_CHAINS: usize = 4;

pub fn measure(r: &mut Resolver, flag: Option<String>) -> Result<ChartMeasure, CliError> {
    Ok(r.or("measure", flag, "conditional".to_owned())?.parse()?)
}

/// Resolves `--format` and `--out`, the latter defaulting to
/// `<command>.<ext>` in the working directory.
pub fn output(r: &mut Resolver, args: OutputArgs, command: &str) -> Result<(Format, PathBuf), CliError> {
    let format = Format::parse(&r.or("format", args.format, "csv".to_owned())?)?;
    let out = r.or("out", args.out, PathBuf::from(format!("{command}.{}", format.ext())))?;
    Ok((format, out))
}

/// A four-level constraint surface from `--P` or `--S` (with `--base`).
pub fn surface(r: &mut Resolver, args: &SurfaceArgs) -> Result<StaticEnsembleSpec, CliError> {
    let m = r.required("m", args.m)?;
    let purity = r.optional("P", args.purity)?;
    let entropy = r.optional("S", args.entropy)?;
    match (purity, entropy) {
        (Some(p), None) => Ok(StaticEnsembleSpec::purity(4, m, p)?),
        (None, Some(s)) => {
            let base = r.or("base", args.base, std::f64::consts::E)?;
            Ok(StaticEnsembleSpec::entropy_with_base(4, m, s, base)?)
        }
        (Some(_), Some(_)) => Err(CliError::Usage("give either --P or --S, not both".into())),
        (None, None) => Err(CliError::Usage("missing --P or --S".into())),
    }
}

pub struct ChainSettings {
    pub samples: usize,
    pub seed: u64,
    pub burn_in: usize,
    pub thinning: usize,
    pub chains: usize,
    pub step_size: f64,
}

pub fn chain_settings(r: &mut Resolver, args: &ChainArgs, default_samples: usize) -> Result<ChainSettings, CliError> {
    Ok(ChainSettings {
        samples: r.or("N", args.samples, default_samples)?,
        seed: r.or("seed", args.seed, DEFAULT_SEED)?,
        burn_in: r.or("burn-in", args.burn_in, 10_000)?,
        thinning: r.or("thinning", args.thinning, 10)?,
        chains: r.or("chains", args.chains, DEFAULT_CHAINS)?,
        step_size: r.or("step-size", args.step_size, 0.01)?,
    })
}

impl ChainSettings {
    pub fn config(&self, spec: StaticEnsembleSpec, measure: ChartMeasure) -> rdens_core::mcmc::ChainConfig {
        let mut cfg = rdens_core::mcmc::ChainConfig::new(spec, self.samples, self.seed);
        cfg.burn_in = self.burn_in;
        cfg.thinning = self.thinning;
        cfg.step_size = self.step_size;
        cfg.measure = measure;
        cfg
    }
}
