//! Command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "tvslip", version, about = "Trust-region solver with overlapping patch \
decomposition for TV-regularized integer optimal control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver from a JSON config file.
    Run { config: PathBuf },
    /// Finite-difference check of the configured model gradient
    /// (exit 0 iff the max relative error is at most 1e-6).
    Gradcheck { config: PathBuf },
    /// Solve a serialized subproblem instance and print the solution.
    Subsolve { instance: PathBuf },
    /// Sweep a benchmark suite and emit one summary CSV row per
    /// configuration.
    Bench {
        /// "oned" or "twod".
        suite: String,
        /// Cells per axis (defaults: 256 for oned, 16 for twod).
        #[arg(long)]
        n: Option<usize>,
        /// Also write the CSV into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => tvslip::cli::cmd_run(&config).map(|res| {
            if res.violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }),
        Command::Gradcheck { config } => tvslip::cli::cmd_gradcheck(&config).map(|err| {
            if err <= 1e-6 {
                ExitCode::SUCCESS
            } else {
                eprintln!("gradient check failed: {err:.3e} > 1e-6");
                ExitCode::from(2)
            }
        }),
        Command::Subsolve { instance } => {
            tvslip::cli::cmd_subsolve(&instance).map(|()| ExitCode::SUCCESS)
        }
        Command::Bench { suite, n, out } => {
            tvslip::cli::cmd_bench(&suite, n, out.as_deref()).map(|()| ExitCode::SUCCESS)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
