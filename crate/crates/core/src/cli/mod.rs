//! Command-line runner: `perorbit <task> --config PATH [overrides]`.

pub mod config;
pub mod runner;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::orbits::Ell;
use config::{ExperimentConfig, Overrides, PotentialConfig, Task};
use runner::CliError;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "PERORBIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "perorbit", version, about = "Periodic-orbit thermodynamic formalism experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate periodic points with Lyapunov exponents and expansion certificates.
    Orbits(Args),
    /// Q_EP table and the P_EP estimate.
    Pressure(Args),
    /// Weak* distances of the periodic-orbit measures to a reference measure.
    Bowen(Args),
    /// Large-deviation counts against the Legendre bound.
    Ldp(Args),
    /// Rate function and generalized entropy by dual ascent.
    Rate(Args),
    /// Exact pressure, entropy and Gibbs data for the configured system.
    Oracle(Args),
}

#[derive(Debug, clap::Args)]
struct Args {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated list, e.g. `1,4,inf`.
    #[arg(long, value_delimiter = ',')]
    ell: Option<Vec<Ell>>,
    #[arg(long = "n-min")]
    n_min: Option<usize>,
    #[arg(long = "n-max", visible_alias = "nmax")]
    n_max: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    #[arg(long = "depth", value_delimiter = ',')]
    depths: Option<Vec<usize>>,
    /// Potential block as JSON, e.g. `{"kind":"geom","t":0.5}`.
    #[arg(long, value_parser = parse_potential)]
    potential: Option<PotentialConfig>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long = "out")]
    out: Option<String>,
}

fn parse_potential(s: &str) -> Result<PotentialConfig, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

impl Command {
    fn split(self) -> (Task, Args) {
        match self {
            Command::Orbits(a) => (Task::Orbits, a),
            Command::Pressure(a) => (Task::Pressure, a),
            Command::Bowen(a) => (Task::Bowen, a),
            Command::Ldp(a) => (Task::Ldp, a),
            Command::Rate(a) => (Task::Rate, a),
            Command::Oracle(a) => (Task::Oracle, a),
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n >= 1).ok_or(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn execute(task: Task, a: Args) -> Result<PathBuf, CliError> {
    let text = std::fs::read_to_string(&a.config).map_err(|source| CliError::Io { path: a.config.clone(), source })?;
    let overrides = Overrides {
        alpha: a.alpha,
        ell: a.ell,
        n_min: a.n_min,
        n_max: a.n_max,
        delta: a.delta,
        depths: a.depths,
        potential: a.potential,
        budget: a.budget,
        seed: a.seed,
        output_dir: a.out,
    };
    let cfg = ExperimentConfig::from_json(&text)?.resolve(task, overrides)?;
    runner::run_and_write(&cfg)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 2;
    }
    let (task, args) = cli.command.split();
    match execute(task, args) {
        Ok(dir) => {
            println!("{}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
