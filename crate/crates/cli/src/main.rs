mod cache;
mod commands;
mod config;
mod error;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use hamsys::solver::GridSpec;

use crate::cache::{atomic_write, Bundle, Cache, Lookup};
use crate::config::{parse_grid, read_config_file, Command, Overrides, RunConfig};
use crate::error::CliError;

/// Critically perturbed Hamiltonian Lane-Emden systems: ground states, inequality
/// checks, mountain-pass levels and radial solutions on balls.
#[derive(Parser)]
#[command(name = "hamsys", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Ground state of the unperturbed system on R^N, its profile and decay regime
    GroundState(Flags),
    /// Inequality suite for the perturbed power on log-spaced samples
    CheckLemmas(Flags),
    /// Sobolev quotient of the ground state and the derived thresholds
    Sobolev(Flags),
    /// Mountain-pass level of the cutoff test family against the compactness threshold
    MpLevel(Flags),
    /// Rayleigh constants on the ball and the smallness thresholds for (lambda, mu)
    Rayleigh(Flags),
    /// Positive radial solution on the ball by two-parameter shooting
    SolveBall(Flags),
    /// Existence sweep over a parameter grid
    Sweep(Flags),
    /// Region verdict from the sufficient existence conditions
    Classify(Flags),
}

#[derive(Args)]
struct Flags {
    /// Space dimension
    #[arg(long = "N")]
    n: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    /// Derived from the critical hyperbola when absent
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Ball radius
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Cutoff radius of the test family
    #[arg(long)]
    rho: Option<f64>,
    /// Comma-separated cutoff scales as fractions of rho
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long)]
    tol: Option<f64>,
    /// Inequality sample count, or mesh intervals for rayleigh
    #[arg(long)]
    samples: Option<usize>,
    /// Sweep axes, e.g. "p=3,3.5,4;lambda=0.5;subcritical=0.9"
    #[arg(long, value_parser = grid_arg)]
    grid: Option<GridSpec<f64>>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized starts
    #[arg(long)]
    seed: Option<u64>,
    /// Neither read nor write the result cache
    #[arg(long)]
    no_cache: bool,
    /// Flat key=value file; flags take precedence over it
    #[arg(long)]
    config: Option<PathBuf>,
}

fn grid_arg(text: &str) -> Result<GridSpec<f64>, String> {
    parse_grid(text).map_err(|e| e.to_string())
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n,
            p: self.p,
            q: self.q,
            r: self.r,
            s: self.s,
            lambda: self.lambda,
            mu: self.mu,
            radius: self.radius,
            rho: self.rho,
            deltas: self.deltas.clone(),
            tol: self.tol,
            samples: self.samples,
            grid: self.grid.clone(),
            seed: self.seed,
            out: self.out.clone(),
            no_cache: self.no_cache.then_some(true),
        }
    }
}

impl Sub {
    fn split(&self) -> (Command, &Flags) {
        match self {
            Sub::GroundState(f) => (Command::GroundState, f),
            Sub::CheckLemmas(f) => (Command::CheckLemmas, f),
            Sub::Sobolev(f) => (Command::Sobolev, f),
            Sub::MpLevel(f) => (Command::MpLevel, f),
            Sub::Rayleigh(f) => (Command::Rayleigh, f),
            Sub::SolveBall(f) => (Command::SolveBall, f),
            Sub::Sweep(f) => (Command::Sweep, f),
            Sub::Classify(f) => (Command::Classify, f),
        }
    }
}

fn configure(cli: &Cli) -> Result<RunConfig, CliError> {
    let (command, flags) = cli.command.split();
    let file = match &flags.config {
        Some(path) => read_config_file(path)?,
        None => Overrides::default(),
    };
    flags.overrides().over(file).resolve(command)
}

fn obtain(cfg: &RunConfig) -> Result<Bundle, CliError> {
    if !cfg.cache {
        return commands::execute(cfg);
    }
    let cache = Cache::from_env();
    let key = cfg.cache_key();
    match cache.lookup(&key) {
        Lookup::Hit(bundle) => {
            eprintln!("cache hit {key}");
            return Ok(bundle);
        }
        Lookup::Evicted => eprintln!("evicted corrupt cache entry {key}"),
        Lookup::Miss => {}
    }
    let bundle = commands::execute(cfg)?;
    if let Err(e) = cache.store(&key, &bundle) {
        eprintln!("warning: cache write failed: {e}");
    }
    Ok(bundle)
}

fn run(args: impl IntoIterator<Item = OsString>) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{}", Cli::command().render_long_help());
            return 1;
        }
    };
    let outcome = configure(&cli).and_then(|cfg| {
        let bundle = obtain(&cfg)?;
        std::fs::create_dir_all(&cfg.out)?;
        for (name, body) in &bundle.files {
            atomic_write(&cfg.out.join(name), body.as_bytes())?;
        }
        Ok((cfg, bundle))
    });
    match outcome {
        Ok((cfg, bundle)) => {
            println!("{}", cfg.out.join("summary.json").display());
            bundle.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
