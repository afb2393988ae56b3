//! Command-line front end for `quadstate`.

mod render;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Environment variable that rescales every numerical tolerance. Ignored by `check`.
pub const TOL_SCALE_VAR: &str = "QUADSTATE_TOL_SCALE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "quadstate", version, about = "Invariant quadratic states of quadratic Bose Hamiltonians")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,

    /// Seed for every randomized step (probe directions, property trials).
    #[arg(long, default_value_t = 7, global = true)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one of the five worked examples and compare against closed forms.
    Example {
        /// Example number, 1 to 5.
        n: u8,
        /// Oscillator frequency (examples 1 and 4).
        #[arg(long, default_value_t = 2.0)]
        omega0: f64,
        /// Time at which the propagator is sampled.
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        /// End of the doubling schedule used for time limits.
        #[arg(long, default_value_t = 1048576.0)]
        t_max: f64,
        /// Dispersion grid for example 5.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Enumerate the angular operators of the invariant states of a Hamiltonian.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Time at which invariance is checked.
        #[arg(long, default_value_t = 1.0)]
        time: f64,
    },
    /// Propagate the Fock state for a fixed time.
    Evolve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
    },
    /// Pointwise limits of the evolved Fock state as t goes to plus and minus infinity.
    Limit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1048576.0)]
        t_max: f64,
    },
    /// Classify a momentum grid mode by mode.
    Modes {
        /// Grid document; a 40-mode quadratic dispersion when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the invariant property suite.
    Check {
        /// Trials per property, overriding the default counts.
        #[arg(long)]
        trials: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::execute(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
