//! `frc` — biparametric Fisher-Rényi complexity of one-dimensional
//! densities: evaluate single points, tabulate parameter sweeps and charts
//! of the blackbody surface, and run the built-in verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid parameters or
//! malformed input, 3 accuracy failure.

mod commands;
mod emit;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fisher_renyi::Error;
use settings::{Command, RunArgs, Settings};

#[derive(Parser)]
#[command(
    name = "frc",
    version,
    about = "Biparametric Fisher-Rényi complexity of one-dimensional densities"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate C^(p,lambda) for one density; prints a JSON report
    Compute(RunArgs),
    /// Tabulate blackbody complexity over parameter ranges and dimensions (CSV)
    Sweep(RunArgs),
    /// Tabulate the (p, lambda) blackbody grid at one dimension and locate extrema (CSV)
    Chart(RunArgs),
    /// Run the invariant suite; exit 0 only if every check passes
    Verify(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Compute(a) => (Command::Compute, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Chart(a) => (Command::Chart, a),
        Cmd::Verify(a) => (Command::Verify, a),
    };
    match run(command, &args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Accuracy { .. } => 3,
                _ => 2,
            })
        }
    }
}

fn run(command: Command, args: &RunArgs) -> fisher_renyi::Result<ExitCode> {
    let s = Settings::resolve(command, args)?;
    if let Some(n) = s.jobs {
        // Grid results are joined positionally, so the pool size can never
        // reorder output; a pool that already exists is left as is.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match command {
        Command::Compute => commands::compute(&s).map(|()| ExitCode::SUCCESS),
        Command::Sweep | Command::Chart => commands::sweep(&s).map(|()| ExitCode::SUCCESS),
        Command::Verify => commands::verify_suite(&s),
    }
}
