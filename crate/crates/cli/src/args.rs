use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Fixed-purity spectra of two-qubit reduced states: static ensembles,
/// random-Hamiltonian dynamics and their comparison.
#[derive(Debug, Parser)]
#[command(name = "rdens", version)]
pub struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true, env = "RDENS_WORKERS")]
    pub workers: Option<usize>,

    /// TOML file of flat `flag = value` pairs; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chart density of the two smallest eigenvalues on a grid.
    StaticDensity(StaticDensityArgs),
    /// Metropolis samples of the static ensemble.
    StaticSample(StaticSampleArgs),
    /// Exact density of the smallest or second-smallest eigenvalue.
    Marginal(MarginalArgs),
    /// Spectra reached by random-Hamiltonian evolution at a target purity.
    Dynamic(DynamicArgs),
    /// Kolmogorov distance between a dynamic ensemble and a reference.
    Compare(CompareArgs),
    /// Distribution of the entropy at fixed purity.
    EntropyDist(EntropyDistArgs),
    /// Purity sphere projected onto the disk: region mask and curves.
    Project(ProjectArgs),
    /// Data files behind one of the six reference figures.
    ReproduceFigure(FigureArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    pub format: Option<String>,
}

/// Constraint surface: `--P` for purity or `--S` for entropy.
#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    /// Environment dimension.
    #[arg(long)]
    pub m: Option<usize>,
    /// Target purity.
    #[arg(long = "P")]
    pub purity: Option<f64>,
    /// Target entropy, in log base `--base`.
    #[arg(long = "S")]
    pub entropy: Option<f64>,
    /// Entropy log base; natural log when omitted.
    #[arg(long)]
    pub base: Option<f64>,
    #[arg(long, value_parser = ["conditional", "lebesgue", "jacobian-weighted"])]
    pub measure: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    /// Number of samples.
    #[arg(long = "N")]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thinning: Option<usize>,
    /// Independent chains; samples are split evenly between them.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Initial proposal step.
    #[arg(long)]
    pub step_size: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct StaticDensityArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StaticSampleArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MarginalArgs {
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "P")]
    pub purity: Option<f64>,
    #[arg(long, value_parser = ["lambda1", "lambda2"])]
    pub marginal: Option<String>,
    /// Abscissas on the support.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long, value_parser = ["conditional", "lebesgue", "jacobian-weighted"])]
    pub measure: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DynamicArgs {
    #[arg(long, value_parser = ["global", "coupling", "spectator", "common"])]
    pub model: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Coupling strength; ignored by the global model.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Central state `sin θ |00> + cos θ |11>`, θ in [0, π/4].
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long = "P")]
    pub purity: Option<f64>,
    /// Number of realizations.
    #[arg(long = "N")]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Evolution horizon; estimated from pilot runs when omitted.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// `exact`, or a sample file to compare against.
    #[arg(long = "static")]
    pub reference: Option<String>,
    /// Sample file from `dynamic` or `static-sample`.
    #[arg(long)]
    pub dynamic: Option<PathBuf>,
    #[arg(long, value_parser = ["lambda1", "lambda2", "chart"])]
    pub marginal: Option<String>,
    /// Defaults to the value in the dynamic file's manifest.
    #[arg(long)]
    pub m: Option<usize>,
    /// Defaults to the value in the dynamic file's manifest.
    #[arg(long = "P")]
    pub purity: Option<f64>,
    /// Bins per axis.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Seed of the error-bar replicates.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = ["conditional", "lebesgue", "jacobian-weighted"])]
    pub measure: Option<String>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EntropyDistArgs {
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "P")]
    pub purity: Option<f64>,
    #[arg(long)]
    pub base: Option<f64>,
    /// Sample file to use instead of sampling.
    #[arg(long = "static")]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, value_parser = ["conditional", "lebesgue", "jacobian-weighted"])]
    pub measure: Option<String>,
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ProjectArgs {
    #[arg(long = "P")]
    pub purity: Option<f64>,
    /// Mask points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Points per traced curve.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Sample file whose spectra are projected as well.
    #[arg(long = "static")]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// Figure number, 1 to 6.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
    pub figure: u8,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Realizations per dynamic run.
    #[arg(long = "N")]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Points per axis of density grids.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Purity of the summary table.
    #[arg(long = "P")]
    pub purity: Option<f64>,
    #[arg(long, value_parser = ["csv", "json"])]
    pub format: Option<String>,
}
