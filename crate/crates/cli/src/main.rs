//! `steplearn`: generate instances, run the iterations, compute certificates,
//! run learning experiments and verify the bounds.
//!
//! Exit codes: 0 success, 1 config error, 2 divergence in a required
//! computation, 3 bound violation found by `verify`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use commands::Global;
use error::CliError;
use output::Format;

#[derive(Parser, Debug)]
#[command(name = "steplearn", version, about = "Step-size learning for gradient descent and conjugate iterations")]
struct Cli {
    /// Config file (TOML, or JSON when the name ends in .json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed, overriding the one in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Encoding of tabular and report outputs.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write serialized instances drawn from a distribution.
    Gen,
    /// Run configurations on instances and record trajectories and costs.
    Run,
    /// Compute the certificate report for a context.
    Bounds,
    /// Run a sample → ERM → holdout learning experiment.
    Learn,
    /// Check the perturbation bounds against simulated runs.
    Verify,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = cli
        .config
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let g = Global {
        config,
        seed: cli.seed,
        out: cli.out,
        format: cli.format,
    };
    let manifest = match cli.command {
        Command::Gen => commands::gen(&g)?,
        Command::Run => commands::run_cmd(&g)?,
        Command::Bounds => commands::bounds(&g)?,
        Command::Learn => commands::learn(&g)?,
        Command::Verify => {
            let (manifest, violations) = commands::verify_cmd(&g)?;
            if violations > 0 {
                return Err(CliError::Violation(format!(
                    "{violations} violations; see {}",
                    g.out.join("verify-report.json").display()
                )));
            }
            manifest
        }
    };
    for p in &manifest.outputs {
        log::info!("wrote {}", g.out.join(p).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("steplearn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
