//! Command-line front end of the `spinpoint` binary.
//!
//! Exit codes: 0 success, 1 input error, 2 validation failure,
//! 3 numerical failure.

mod commands;
pub mod files;
pub mod output;

use crate::error::Error;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Overrides the spin-count cap.
pub const MAX_N_ENV: &str = "SPINPOINT_MAX_N";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError { code: EXIT_NUMERICAL, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidPair { .. } => EXIT_VALIDATION,
            Error::NearPole { .. }
            | Error::Quadrature { .. }
            | Error::Extrapolation { .. }
            | Error::NormDrift { .. }
            | Error::NoDecay => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "spinpoint", version, about = "Point interactions of a particle with localized spins 1/2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Model file (`spinpoint-model v1` JSON).
    model: PathBuf,
    /// Evaluate even if the boundary pair fails validation.
    #[arg(long)]
    unchecked: bool,
    /// Use the matrix-table factor for δ presets instead of the stated
    /// jump condition.
    #[arg(long)]
    paper_literal: bool,
    /// Output file (directory for `evolve`); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance override: hermiticity for `validate`, root acceptance
    /// for `boundstates`, norm drift for `evolve`.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hermiticity, rank and locality of the boundary pair.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Resolvent kernel values at a spectral point.
    Kernel {
        #[command(flatten)]
        common: Common,
        /// Spectral point `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// CSV of `x,σ,x′,σ′` rows (`x` is three columns in 3D).
        #[arg(long)]
        points: Option<PathBuf>,
        /// Seed for random test points when `--points` is absent.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random test points.
        #[arg(long, default_value_t = 16)]
        count: usize,
    },
    /// Discrete eigenvalues below the essential spectrum.
    Boundstates {
        #[command(flatten)]
        common: Common,
        /// Lower end of the search window.
        #[arg(long, allow_hyphen_values = true)]
        emin: Option<f64>,
        /// Scan points.
        #[arg(long, default_value_t = 400)]
        scan_points: usize,
    },
    /// Entries of `Γ(z)` and `Γ^{AB}(z)`.
    Gamma {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Spectral time evolution of a Gaussian state (d = 1).
    Evolve {
        #[command(flatten)]
        common: Common,
        /// State file (`spinpoint-state v1` JSON).
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated times.
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, default_value_t = 2048)]
        nodes: usize,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Output grid points when the state file has no grid.
        #[arg(long, default_value_t = 200)]
        grid_points: usize,
    },
    /// Writes a model file for a named preset.
    Preset {
        /// free | delta | offdiag | delta-prime
        name: String,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: usize,
        /// Per-site parameters, `p+,p−` (or `γ` for delta-prime), one flag
        /// per site.
        #[arg(long = "param", allow_hyphen_values = true)]
        params: Vec<String>,
        /// Comma-separated Zeeman couplings; zero by default.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        /// Site spacing along the first axis.
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[arg(long)]
        paper_literal: bool,
        /// Write explicit `A`, `B` matrices instead of the preset record.
        #[arg(long)]
        explicit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the CLI on `args` (program name first), writing to the given
/// streams, and returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    match commands::dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

/// The spin-count cap, from [`MAX_N_ENV`] if set.
fn spin_cap() -> Result<usize, CliError> {
    match std::env::var(MAX_N_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::input(format!("{MAX_N_ENV}={v:?} is not a count"))),
        Err(_) => Ok(crate::spinspace::DEFAULT_MAX_SPINS),
    }
}
