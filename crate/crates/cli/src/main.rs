//! `mwi`: command-line access to martingale transport bounds, Wasserstein
//! distances, ratio sweeps over the counterexample families and the
//! verification suite.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mwi_core::{ExtendedIndex, Norm};

#[derive(Debug, Parser)]
#[command(name = "mwi", version, about = "Martingale Wasserstein inequality toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Norm on R^d: euclidean, sup, or p:<p> with p >= 1.
    #[arg(long, global = true, default_value = "euclidean")]
    pub norm: Norm,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout (only once the command succeeded).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// LP feasibility tolerance (scaled by 1 + |b|_inf).
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub feas_tol: f64,
    /// LP pivot budget; defaults to 20 (rows + columns) + 10000.
    #[arg(long, global = true)]
    pub max_iterations: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// W_q between two measure files.
    Wasserstein {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        /// Order q >= 1 or "inf".
        #[arg(long)]
        q: ExtendedIndex,
        /// Include the optimal coupling.
        #[arg(long)]
        coupling: bool,
        /// Use the LP even on the real line.
        #[arg(long)]
        force_lp: bool,
    },
    /// Minimal and maximal martingale transport costs.
    Mot {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        rho: f64,
    },
    /// Both martingale Wasserstein ratios for one pair.
    Ratio {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        q: ExtendedIndex,
    },
    /// Writes a family member's marginals (and coupling) as measure files.
    Family {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        spread: Spread,
        /// Rotation angle in (0, pi); selects the planar family (needs --alpha).
        #[arg(long)]
        theta: Option<f64>,
        /// Directory receiving mu.json, nu.json and coupling.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Ratios over a list of n, from closed forms and (up to a cap) LPs.
    FamilySweep {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        q: ExtendedIndex,
        #[command(flatten)]
        spread: Spread,
        /// Comma separated list of n >= 2.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long)]
        theta: Option<f64>,
        /// Largest n verified by LP.
        #[arg(long, default_value_t = 200)]
        lp_cap: usize,
    },
    /// Pointwise inequality constants for rho >= 2.
    LemmaConstants {
        #[arg(long)]
        rho: f64,
    },
    /// Runs the acceptance checks.
    VerifyAll {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
    },
}

#[derive(Debug, Clone, Copy, Args)]
#[group(required = true, multiple = false)]
pub struct Spread {
    /// Fixed jump z > 0.
    #[arg(long)]
    pub z: Option<f64>,
    /// z = n^-alpha with alpha in [0, 1).
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
