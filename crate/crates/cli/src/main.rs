//! `subspace-qsl`: quantum-speed-limit analyses on JSON instance configs.
//!
//! Subcommands compute rate and time bounds (`bounds`), sample angle
//! trajectories to CSV (`evolve`), locate first crossing times (`t-theta`),
//! emit the canonical two-level instance (`example`), and re-verify every
//! promised inequality on seeded random instances (`verify`).

mod commands;
mod config;
mod error;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::Result;

#[derive(Parser)]
#[command(
    name = "subspace-qsl",
    version,
    about = "Speed limits for subspace quantum dynamics: bounds, trajectories, crossing times"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rates and time bounds for one instance (JSON on stdout, table on stderr)
    Bounds {
        /// Instance description (JSON)
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Target angle in radians; repeat for several
        #[arg(long, value_name = "REAL")]
        theta: Vec<f64>,
        /// Show angles in degrees in the stderr table (output stays radians)
        #[arg(long)]
        degrees: bool,
    },
    /// Sample the angle trajectory onto a uniform grid as CSV
    Evolve {
        /// Instance description (JSON)
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// End of the time grid
        #[arg(long, value_name = "REAL")]
        t_max: f64,
        /// Grid size, both endpoints included
        #[arg(long, value_name = "INT", default_value_t = 201)]
        points: usize,
        /// CSV destination; stdout when absent
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Show angles in degrees in the stderr summary
        #[arg(long)]
        degrees: bool,
    },
    /// Earliest time the angle from the initial subspace reaches a target
    #[command(name = "t-theta")]
    TTheta {
        /// Instance description (JSON)
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Target angle in radians; repeat for several (default pi/2)
        #[arg(long, value_name = "REAL")]
        theta: Vec<f64>,
        /// Search window; default scales with the expected crossing time
        #[arg(long, value_name = "REAL")]
        horizon: Option<f64>,
        /// Time resolution of the reported crossing
        #[arg(long, value_name = "REAL")]
        tol: Option<f64>,
        /// Show angles in degrees in the stderr summary
        #[arg(long)]
        degrees: bool,
    },
    /// Emit the two-level instance on which every bound is tight
    Example {
        /// First energy level
        #[arg(long, value_name = "REAL", allow_negative_numbers = true)]
        e1: f64,
        /// Second energy level, distinct from the first
        #[arg(long, value_name = "REAL", allow_negative_numbers = true)]
        e2: f64,
        /// Config destination; stdout when absent
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Re-check every promised inequality on seeded random instances
    Verify {
        /// Number of random instances
        #[arg(long, value_name = "INT", default_value_t = 100)]
        trials: usize,
        /// Master seed; fixes every instance and the whole output
        #[arg(long, value_name = "INT", default_value_t = 1)]
        seed: u64,
        /// Largest ambient dimension drawn
        #[arg(long, value_name = "INT", default_value_t = 6)]
        n_max: usize,
        /// Largest subspace rank drawn
        #[arg(long, value_name = "INT", default_value_t = 3)]
        k_max: usize,
        /// Where violating instances are serialized
        #[arg(long, value_name = "PATH", default_value = "qsl-violations.json")]
        out: PathBuf,
        #[arg(long, hide = true)]
        inject_non_hermitian: bool,
    },
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Bounds {
            config,
            theta,
            degrees,
        } => {
            let instance = config::load(&config)?;
            commands::cmd_bounds(&instance, &theta, degrees)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Evolve {
            config,
            t_max,
            points,
            out,
            degrees,
        } => {
            let instance = config::load(&config)?;
            commands::cmd_evolve(&instance, t_max, points, out.as_deref(), degrees)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::TTheta {
            config,
            theta,
            horizon,
            tol,
            degrees,
        } => {
            let instance = config::load(&config)?;
            commands::cmd_t_theta(&instance, &theta, horizon, tol, degrees)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Example { e1, e2, out } => {
            commands::cmd_example(e1, e2, out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            trials,
            seed,
            n_max,
            k_max,
            out,
            inject_non_hermitian,
        } => {
            let args = verify::VerifyArgs {
                trials,
                seed,
                n_max,
                k_max,
                out,
                inject_non_hermitian,
            };
            let all_passed = verify::cmd_verify(&args)?;
            Ok(if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
