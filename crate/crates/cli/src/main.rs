use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use petz_core::harness::{run_reconstruct, run_sweep, run_verify, ExperimentConfig, RunOutcome, EXIT_FAIL, EXIT_USAGE};

/// Numerical checks of stability bounds for the data processing inequality.
#[derive(Parser)]
#[command(name = "petz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every bound on sampled trials; JSON report.
    Verify(Common),
    /// Perturb exactly recoverable pairs along an epsilon ladder; CSV.
    Sweep(Common),
    /// Compare spectral entropies with their integral representations; JSON report.
    Reconstruct(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; defaults to the config's `output_path`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(common: &Common) -> Result<ExperimentConfig, String> {
    let text = fs::read_to_string(&common.config).map_err(|e| format!("{}: {e}", common.config.display()))?;
    let mut config = ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn emit(outcome: &RunOutcome, path: Option<&PathBuf>) -> std::io::Result<()> {
    match path {
        Some(p) => {
            fs::write(p, &outcome.output)?;
            println!("{}", outcome.summary);
            println!("wrote {}", p.display());
        }
        None => {
            std::io::stdout().write_all(&outcome.output)?;
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, fn(&ExperimentConfig) -> petz_core::Result<RunOutcome>) = match &cli.command {
        Command::Verify(c) => (c, run_verify),
        Command::Sweep(c) => (c, run_sweep),
        Command::Reconstruct(c) => (c, run_reconstruct),
    };
    let config = match load(common) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let start = Instant::now();
    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let path = common.out.as_ref().or(config.output_path.as_ref());
    if let Err(e) = emit(&outcome, path) {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(EXIT_FAIL as u8);
    }
    eprintln!("elapsed {:.2?}", start.elapsed());
    ExitCode::from(outcome.exit_code as u8)
}
