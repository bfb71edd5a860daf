//! Command-line front end: reads a run config, dispatches a subcommand and
//! writes its table as CSV under the configured output directory.
//!
//! Exit status: 0 on success, 1 on parse, validation or I/O errors, 2 when
//! `verify` records a failed check, 3 on numerical blow-up of the finite
//! horizon solve.

pub mod commands;
pub mod config;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, parse_with_overrides, ConfigError, ParseError, RunConfig, ValidationError};
pub use table::{Cell, Table};

/// Optional worker-count override; `--workers` takes precedence.
pub const WORKERS_ENV: &str = "MERTON_EQ_WORKERS";

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const INVALID: i32 = 1;
    pub const VERIFY_FAILED: i32 = 2;
    pub const BLOW_UP: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "merton-eq", version, about = "Equilibrium consumption-investment policies under non-exponential discounting")]
pub struct Cli {
    /// Worker threads for Monte Carlo checks (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Config file.
    #[arg(short, long)]
    pub config: PathBuf,
    /// Override a config value, e.g. `--set market.sigma=0.25`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coupling coefficients of the (f, g) system.
    Coeffs(RunArgs),
    /// Finite-horizon (f, g) solution and equilibrium consumption: t,f,g,c_star.
    SolveFinite(RunArgs),
    /// Stationary equilibrium candidates with their admissibility flags.
    SolveInfinite(RunArgs),
    /// Exponential (Merton) baseline and its transversality conditions.
    Baseline(RunArgs),
    /// All verification checks for the configured case: check,target,estimate,error,pass.
    Verify(RunArgs),
    /// Naive consumption plans c̃_t(s) for several start times t: t,s,c_naive.
    DemoInconsistency(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Coeffs(a)
            | Command::SolveFinite(a)
            | Command::SolveInfinite(a)
            | Command::Baseline(a)
            | Command::Verify(a)
            | Command::DemoInconsistency(a) => a,
        }
    }

    fn file_name(&self) -> &'static str {
        match self {
            Command::Coeffs(_) => "coeffs.csv",
            Command::SolveFinite(_) => "finite.csv",
            Command::SolveInfinite(_) => "infinite.csv",
            Command::Baseline(_) => "baseline.csv",
            Command::Verify(_) => "verify.csv",
            Command::DemoInconsistency(_) => "demo.csv",
        }
    }
}

fn workers(cli: &Cli) -> Result<Option<usize>, String> {
    if let Some(n) = cli.workers {
        return Ok(Some(n));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{WORKERS_ENV}={v} is not a worker count")),
        Err(_) => Ok(None),
    }
}

/// Runs the parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let workers = match workers(cli) {
        Ok(Some(0)) => {
            eprintln!("error: worker count must be at least 1");
            return exit::INVALID;
        }
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::INVALID;
        }
    };
    match workers {
        Some(n) => merton_equilibrium::verification::with_workers(n, || dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}

fn dispatch(command: &Command) -> i32 {
    let args = command.args();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return exit::INVALID;
        }
    };
    let config = match parse_with_overrides(&text, &args.set) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return exit::INVALID;
        }
    };
    let outcome = match command {
        Command::Coeffs(_) => Ok((commands::coeffs(&config), true)),
        Command::SolveFinite(_) => commands::solve_finite(&config).map(|t| (t, true)),
        Command::SolveInfinite(_) => commands::solve_infinite(&config).map(|t| (t, true)),
        Command::Baseline(_) => commands::baseline(&config).map(|t| (t, true)),
        Command::Verify(_) => commands::verify(&config),
        Command::DemoInconsistency(_) => commands::demo_inconsistency(&config).map(|t| (t, true)),
    };
    let (table, passed) = match outcome {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return if e.is_blow_up() { exit::BLOW_UP } else { exit::INVALID };
        }
    };

    let dir = args.out.clone().unwrap_or(config.output_dir);
    let path = dir.join(command.file_name());
    let csv = table.to_csv_string();
    if let Err(e) = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(&path, &csv)) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return exit::INVALID;
    }
    print!("{csv}");
    eprintln!("wrote {}", path.display());
    if passed {
        exit::SUCCESS
    } else {
        eprintln!("verification failed");
        exit::VERIFY_FAILED
    }
}
