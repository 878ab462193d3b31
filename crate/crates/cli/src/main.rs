mod commands;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypocone::Error;

/// Tangent cones, symbols and sub-Riemannian distances for bracket-generating frames.
///
/// Set RAYON_NUM_THREADS to bound the worker pool.
#[derive(Parser, Debug)]
#[command(name = "hypo", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Model file (JSON).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized restarts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance (injectivity margin, endpoint residual or membership defect).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Truncation size; a comma separated list for `estimate`.
    #[arg(long = "K", global = true)]
    pub k: Option<String>,
    /// Control intervals for distance estimates.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Restarts for distance estimates.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hall basis and structure constants (JSON).
    Basis,
    /// Anchored field of every Hall word (CSV).
    Brackets,
    /// Sampled tangent cone at a point (CSV).
    Cones {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Helffer-Nourrigat cone membership of a functional (JSON).
    Hn {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Coordinates in the dual Hall basis.
        #[arg(long, allow_hyphen_values = true)]
        functional: String,
    },
    /// Principal symbol on one representation.
    Symbol {
        #[arg(long)]
        op: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// `char:a,b`, `schrodinger:+1` or `schrodinger:-1`.
        #[arg(long)]
        rep: String,
    },
    /// Maximal hypoellipticity verdict over a grid (CSV).
    HypoCheck {
        #[arg(long)]
        op: PathBuf,
        /// Name of a model grid, or points `x,y;x,y`.
        #[arg(long, default_value = "default")]
        grid: String,
    },
    /// Distance estimate between two points (CSV).
    CcDist {
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// Also write the optimal trajectory as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Rescaled distances against the model space (CSV).
    ConeCheck {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Rows `a,b,c;d,e,f` spanning H; defaults to the limit along the fixed path.
        #[arg(long, allow_hyphen_values = true)]
        subspace: Option<String>,
        /// Rows `a,b,c;...`; defaults to the Hall basis vectors.
        #[arg(long, allow_hyphen_values = true)]
        directions: Option<String>,
        #[arg(long, default_value = "0.2,0.1,0.05")]
        t: String,
    },
    /// Finite-K constants of the maximal estimate on a torus model (CSV).
    Estimate {
        /// The operator D.
        #[arg(long)]
        op: PathBuf,
        /// The operator P that should be controlled by D.
        #[arg(long)]
        test: PathBuf,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(m: impl Into<String>) -> Self {
        CliError { code: 1, message: m.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Model { .. } => 2,
            Error::NonConverged { .. } => 3,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = commands::run(&cli.command, &cli.global).and_then(|bytes| {
        match &cli.global.out {
            Some(p) => fs::write(p, bytes)?,
            None => io::stdout().write_all(&bytes)?,
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
