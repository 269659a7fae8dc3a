//! `floquet`: batch front-end for the discriminant engine.
//!
//! Every subcommand reads a coefficient document (`--input`), writes one
//! CSV or JSON payload (stdout or `--output`) and exits 0, 2 (bad input)
//! or 3 (numerical failure, diagnostic JSON on stderr).

mod commands;
mod diag;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use diag::Failure;

#[derive(Debug, Parser)]
#[command(name = "floquet", version, about = "Spectral analysis of periodic Sturm-Liouville problems with indefinite weight")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Coefficient document (JSON).
    #[arg(short, long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the payload here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Payload format; each subcommand has its own default.
    #[arg(short, long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Relative integration tolerance.
    #[arg(long, global = true, env = "FLOQUET_TOL")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// D, Ddot and the finite-difference cross-check on a rectangular grid.
    Scan {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        re: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        im: Vec<f64>,
        /// Points per axis (degenerate axes get one).
        #[arg(long, default_value_t = 101)]
        n: usize,
    },
    /// Real bands inside a window.
    Bands {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        window: Vec<f64>,
    },
    /// Spectral curves inside a box.
    Curves {
        #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true, required = true)]
        bbox: Vec<f64>,
        /// Seed grid density per axis.
        #[arg(long, default_value_t = 12)]
        seeds: usize,
    },
    /// Eigenvalues of the quasi-periodic problem with parameter t.
    Eigs {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true, required = true)]
        bbox: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        max_roots: usize,
    },
    /// Sign-type partition, critical points, negative squares and radii.
    Classify {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        window: Vec<f64>,
        /// Half-height of the critical-point search box around the window.
        #[arg(long, default_value_t = 1.0)]
        im_half: f64,
        /// Number of t samples in [0, pi] for the negative-squares table.
        #[arg(long, default_value_t = 9)]
        kappa_samples: usize,
        /// Skip the (expensive) definiteness radii.
        #[arg(long)]
        no_radius: bool,
    },
    /// Apply the fiber resolvent to samples of g.
    Resolve {
        /// Quasi-momentum, `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Spectral parameter, `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// CSV with columns x, Re g, Im g covering the period cell.
        #[arg(long)]
        g: PathBuf,
    },
    /// Fundamental system on a uniform grid.
    Trace {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value_t = 201)]
        n: usize,
    },
    /// Validation, turning points and the condition at infinity.
    Check,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, diagnostic }) => {
            eprintln!("{diagnostic}");
            ExitCode::from(code)
        }
    }
}
