//! `walklab` command-line interface.
//!
//! Exit status: 0 on success, 1 on usage or input errors, 2 when a simulation
//! or law check violates an exact invariant.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use walklab_core::statistics::parse_count;
use walklab_core::{FitWindow, ModelKind, WalkError};

#[derive(Debug, Parser)]
#[command(
    name = "walklab",
    version,
    about = "Simulate and analyse superdiffusive self-interacting random walks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path and write its trajectory CSV.
    Simulate(SimulateArgs),
    /// Run an ensemble and write summary.json, paths.jsonl and hist.csv.
    Ensemble(EnsembleArgs),
    /// Re-fit a log-log slope on an existing trajectory CSV.
    Analyze(AnalyzeArgs),
    /// Print chi, the superdiffusivity flag, C0' and the theta iteration.
    Exponents(ExponentsArgs),
    /// Enumerate a drift-walk transition law and check its moments.
    VerifyLaw(VerifyLawArgs),
}

fn count(s: &str) -> Result<u64, String> {
    parse_count(s).ok_or_else(|| format!("expected a non-negative integer, got '{s}'"))
}

fn window(s: &str) -> Result<FitWindow, String> {
    s.parse().map_err(|e: WalkError| e.to_string())
}

#[derive(Debug, Clone, Args)]
struct DriftParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value = "lattice")]
    model: ModelKind,
    #[command(flatten)]
    params: DriftParamArgs,
    #[arg(long, value_parser = count, default_value = "100000")]
    steps: u64,
    #[arg(long = "seed", value_parser = count)]
    master_seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    path_index: u64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    y0: f64,
    /// Number of log-spaced rows; every step is written when omitted.
    #[arg(long)]
    checkpoints: Option<usize>,
    #[arg(long, value_parser = window)]
    fit_window: Option<FitWindow>,
    /// Trajectory CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    /// JSON config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[command(flatten)]
    params: DriftParamArgs,
    #[arg(long, value_parser = count)]
    steps: Option<u64>,
    #[arg(long, value_parser = count)]
    paths: Option<u64>,
    #[arg(long, value_parser = count)]
    master_seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y0: Option<f64>,
    #[arg(long)]
    checkpoints: Option<usize>,
    #[arg(long, value_parser = window)]
    fit_window: Option<FitWindow>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores). Defaults to $WALKLAB_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    save_trajectories: bool,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = window)]
    fit_window: Option<FitWindow>,
    /// Column to fit against `n`; defaults to `X`, then `x`.
    #[arg(long)]
    column: Option<String>,
}

#[derive(Debug, Args)]
struct ExponentsArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Innovation bound used by C0'.
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Moment order; defaults to max(4, 2 + alpha).
    #[arg(long)]
    nu: Option<f64>,
    /// Start of the theta iteration; defaults to nu * chi + 10.
    #[arg(long)]
    theta0: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyLawArgs {
    #[arg(long, default_value = "lattice")]
    model: ModelKind,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    n: u64,
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    y: f64,
}

/// Failure of a subcommand, mapped onto the exit status.
#[derive(Debug)]
enum Failure {
    Input(String),
    Invariant(String),
}

impl From<WalkError> for Failure {
    fn from(e: WalkError) -> Self {
        if e.is_invariant_violation() {
            Failure::Invariant(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Ensemble(a) => commands::ensemble(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Exponents(a) => commands::exponents(a),
        Command::VerifyLaw(a) => commands::verify_law(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violation: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_violation_maps_to_invariant_failure() {
        let e = WalkError::ZetaViolation {
            path_index: 0,
            n: 1,
            x: 0.0,
            y: 0.0,
            zeta: 2.0,
            bound: 1.0,
        };
        assert!(matches!(Failure::from(e), Failure::Invariant(_)));
        assert!(matches!(
            Failure::from(WalkError::Config("x".into())),
            Failure::Input(_)
        ));
    }
}
