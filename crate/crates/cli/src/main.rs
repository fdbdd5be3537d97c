//! `fockspin`: verification suites, correlations, entanglement integrals,
//! fits and sweeps. All physical inputs are dimensionless with ħ = 1.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Evaluation, Options};
use error::CliResult;
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "fockspin", version, about = "Exact fermionic spin-entanglement numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write result rows here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Seed for measurement noise; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweep points.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Add wall-clock columns to the output.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an invariant suite: algebra, eprb, field, vacuum-rep or all.
    Verify { suite: String },
    /// Correlations for every sweep point.
    Correlate,
    /// Fit sin 2γ to a sample file with columns n1x,n1y,n1z,n2x,n2y,n2z,correlation.
    Fit { input: PathBuf },
    /// Exact against first-order lattice correlations over a list of couplings.
    LatticeCompare,
    /// Entanglement integral L only.
    Entangle,
    /// Like `correlate`, but the config must declare at least one sweep.
    Sweep,
}

fn run(cli: Cli) -> CliResult<()> {
    let opts = Options {
        config: cli.config,
        output: cli.output,
        format: cli.format,
        seed: cli.seed,
        jobs: cli.jobs,
        timing: cli.timing,
        env: std::env::vars().filter(|(k, _)| k.starts_with(config::ENV_PREFIX)).collect(),
    };
    match cli.command {
        Command::Verify { suite } => commands::verify(&opts, &suite),
        Command::Correlate => commands::evaluate(&opts, Evaluation::Correlate, false),
        Command::Fit { input } => commands::fit(&opts, &input),
        Command::LatticeCompare => commands::lattice_compare(&opts),
        Command::Entangle => commands::evaluate(&opts, Evaluation::Entangle, false),
        Command::Sweep => commands::evaluate(&opts, Evaluation::Correlate, true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
