use std::path::{Path, PathBuf};
use std::process::ExitCode;

use carleman_adr_cli::experiments::{
    run_be_verify, run_convergence, run_p0_scan, run_pauli_scaling,
};
use carleman_adr_cli::{CliError, Config, Report};
use clap::{Args, Parser, Subcommand};

/// Thread-count override for the parallel kernels.
const THREADS_ENV: &str = "ADR_THREADS";

#[derive(Parser)]
#[command(
    name = "carleman-adr",
    version,
    about = "Carleman linearization experiments for the advection-diffusion-reaction equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Euler vs truncated Carleman evolution for a list of orders
    Convergence(RunArgs),
    /// Pauli truncation distance for Carleman and linear-only matrices
    Pauli(RunArgs),
    /// Block-encoding success probability over Courant-number grids
    P0scan(RunArgs),
    /// Block-encoding circuits against dense oracles
    Beverify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// key = value config file; omitted keys take their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// output directory, created if missing
    #[arg(long)]
    out: PathBuf,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(
    args: &RunArgs,
    f: fn(&Config, &Path) -> Result<Report, CliError>,
) -> Result<Report, CliError> {
    let cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    f(&cfg, &args.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Convergence(a) => run(a, run_convergence),
        Command::Pauli(a) => run(a, run_pauli_scaling),
        Command::P0scan(a) => run(a, run_p0_scan),
        Command::Beverify(a) => run(a, run_be_verify),
    };
    match result {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for msg in &report.failures {
                eprintln!("tolerance failure: {msg}");
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
