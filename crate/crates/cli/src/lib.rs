//! Command-line driver: configuration parsing, subcommand dispatch and report emission.

pub mod config;
pub mod report;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{parse_config, ConfigError, SolveConfig};
pub use report::{write_report, RunResults, Summary, TimeSeriesRow};
pub use run::{run_linear, run_nls};

pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const RESONANCE: i32 = 3;
    pub const NO_CONVERGENCE: i32 = 4;
    pub const NON_FINITE: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] mpnls::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use mpnls::Error as E;
        match self {
            CliError::Config(_) => exit_code::CONFIG,
            CliError::Io { .. } => exit_code::IO,
            CliError::Solver(e) => match e {
                E::Resonance { .. } => exit_code::RESONANCE,
                E::NoConvergence { .. } => exit_code::NO_CONVERGENCE,
                E::NonFinite(_) | E::NonFiniteInput => exit_code::NON_FINITE,
                E::Io(_) => exit_code::IO,
                _ => exit_code::CONFIG,
            },
        }
    }
}

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

#[derive(Debug, Parser)]
#[command(name = "mpnls", version, about = "Multipoint Schrödinger solver and estimate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ConfigArg {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the linear multipoint problem and write a report
    SolveLinear(ConfigArg),
    /// Solve the nonlinear multipoint problem by Picard iteration
    SolveNls(ConfigArg),
    /// Measure the L^{p'} -> L^p decay of the free evolution
    VerifyDispersive(ConfigArg),
    /// Measure Strichartz ratios of the free evolution over random data
    VerifyStrichartz(ConfigArg),
    /// Critical regularity and classification of a power nonlinearity
    Classify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
    },
    /// Admissibility of a Strichartz pair (use `inf` for infinity)
    CheckAdmissible {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = config::parse_exponent)]
        q: f64,
        #[arg(long, value_parser = config::parse_exponent)]
        r: f64,
    },
}

/// Runs the program on `argv` (including the program name) and returns the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { exit_code::CONFIG } else { exit_code::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => exit_code::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn load_config(path: &PathBuf) -> Result<SolveConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    Ok(parse_config(&text)?)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::SolveLinear(arg) => {
            let config = load_config(&arg.config)?;
            let results = run_linear(&config)?;
            let written = write_report(&results, &config)?;
            report_written(&written);
        }
        Command::SolveNls(arg) => {
            let config = load_config(&arg.config)?;
            let results = run_nls(&config)?;
            let written = write_report(&results, &config)?;
            report_written(&written);
        }
        Command::VerifyDispersive(arg) => {
            let config = load_config(&arg.config)?;
            let written = run::verify_dispersive(&config)?;
            report_written(&[written]);
        }
        Command::VerifyStrichartz(arg) => {
            let config = load_config(&arg.config)?;
            let written = run::verify_strichartz(&config)?;
            report_written(&[written]);
        }
        Command::Classify { n, p, s } => {
            println!("{}", run::classify(n, p, s)?);
        }
        Command::CheckAdmissible { n, q, r } => {
            println!("{}", run::check_admissible(n, q, r)?);
        }
    }
    Ok(())
}

fn report_written(paths: &[PathBuf]) {
    for path in paths {
        println!("wrote {}", path.display());
    }
}
