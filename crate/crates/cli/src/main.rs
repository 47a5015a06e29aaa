use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod config;
mod error;
mod output;

use args::{Cli, Command};
use config::Resolver;
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let mut r = Resolver::new(cli.config.as_deref())?;
    match cli.command {
        Command::StaticDensity(a) => commands::statics::static_density(&mut r, a),
        Command::StaticSample(a) => commands::statics::static_sample(&mut r, a),
        Command::Marginal(a) => commands::statics::marginal_cmd(&mut r, a),
        Command::Dynamic(a) => commands::dynamic::dynamic(&mut r, a),
        Command::Compare(a) => commands::dynamic::compare(&mut r, a),
        Command::EntropyDist(a) => commands::statics::entropy_dist(&mut r, a),
        Command::Project(a) => commands::project::project(&mut r, a),
        Command::ReproduceFigure(a) => commands::figures::reproduce(&mut r, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let err = CliError::Usage(e.kind().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
