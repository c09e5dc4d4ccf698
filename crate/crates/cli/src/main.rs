use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

mod commands;
mod report;

use report::Failure;

#[derive(Debug, Parser)]
#[command(name = "decorr", version, about = "Decorrelation analysis for discrete pair-interaction kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full and balanced positive-definiteness of a kernel.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "CSV")]
        kernel: PathBuf,
    },
    /// Decorrelation verdict at a marginal (exit 1 when not decorrelated).
    Verdict {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "CSV")]
        kernel: PathBuf,
        #[arg(long, value_name = "JSON")]
        marginal: PathBuf,
        /// Simplex grid resolution r.
        #[arg(long, alias = "resolution", default_value_t = decorr_core::mixture::DEFAULT_RESOLUTION)]
        grid: usize,
    },
    /// Minimal N-body pair energies; `--out` receives a CSV table.
    Nbody {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "CSV")]
        kernel: PathBuf,
        #[arg(long, value_name = "JSON")]
        marginal: PathBuf,
        /// Body count `N` or inclusive range `A..B`.
        #[arg(short = 'N', long = "bodies", default_value = "4", value_parser = parse_bodies)]
        bodies: Bodies,
    },
    /// Gegenbauer expansion of a zonal profile, with a random Gram check.
    Expand {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "CSV")]
        profile: PathBuf,
        /// Sphere dimension d (λ = (d − 1)/2).
        #[arg(long, conflicts_with = "lambda", required_unless_present = "lambda")]
        dim: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = decorr_core::basis::DEFAULT_N_MAX)]
        n_max: usize,
        #[arg(long, default_value_t = decorr_core::basis::DEFAULT_QUADRATURE_ORDER)]
        quadrature: usize,
        /// Random point sets for the Gram check (0 disables it).
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 40)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Spectrum of a circulant profile or of a kernel matrix.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "CSV", conflicts_with = "kernel", required_unless_present = "kernel")]
        circulant: Option<PathBuf>,
        #[arg(long, value_name = "CSV")]
        kernel: Option<PathBuf>,
    },
    /// Two-point correlation witness at a marginal.
    Witness {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "CSV")]
        kernel: PathBuf,
        #[arg(long, value_name = "JSON")]
        marginal: PathBuf,
        /// Step size; defaults to the largest feasible one.
        #[arg(long)]
        eps: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value_t = decorr_core::DEFAULT_TOL, value_parser = parse_tol)]
    tol: f64,
    /// Report destination (CSV table for `nbody`); stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct Bodies(RangeInclusive<usize>);

fn parse_bodies(s: &str) -> Result<Bodies, String> {
    let bad = || format!("`{s}` is neither an integer nor a range A..B");
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim_start_matches('=').trim()),
        None => (s.trim(), s.trim()),
    };
    let a: usize = a.parse().map_err(|_| bad())?;
    let b: usize = b.parse().map_err(|_| bad())?;
    let max = decorr_core::nbody::MAX_BODIES;
    if a < 2 || b < a || b > max {
        return Err(format!("body counts must satisfy 2 ≤ A ≤ B ≤ {max}"));
    }
    Ok(Bodies(a..=b))
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
        _ => Err(format!("`{s}` is not a positive tolerance")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or_default();
            eprintln!("decorr: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { input, message }) => {
            eprintln!("decorr: {input}: {message}");
            ExitCode::from(2)
        }
    }
}
