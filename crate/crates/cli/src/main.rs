//! `whitham` command-line front end.

// negated float comparisons are used on purpose: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{parse_list, parse_window, read_config, Command, ConfigError, Partial, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "whitham", version, about = "Solitary waves of the Whitham equation: kernels, solver, checks and evolution")]
#[command(allow_negative_numbers = true)]
struct Cli {
    /// Pipeline to run; may instead be given as `command=` in the config file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// Flat key=value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Wave speed (c > 1).
    #[arg(long)]
    c: Option<f64>,
    /// Comma-separated ascending list of wave speeds.
    #[arg(long = "c-list")]
    c_list: Option<String>,
    /// Half-length of the periodic box [-L, L).
    #[arg(long = "L")]
    half_length: Option<f64>,
    /// Number of grid points (power of two).
    #[arg(long = "N")]
    n: Option<usize>,
    /// Solver residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Time step for `evolve` (defaults to the stability bound).
    #[arg(long)]
    dt: Option<f64>,
    /// Final time for `evolve`.
    #[arg(long = "T")]
    t_end: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized batteries.
    #[arg(long)]
    seed: Option<u64>,
    /// Fit window `x_lo,x_hi` for decay rates.
    #[arg(long, value_parser = parse_window)]
    window: Option<(f64, f64)>,
    /// Stored profile CSV for `verify`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Run the full battery in `verify`.
    #[arg(long)]
    all: bool,
}

impl Cli {
    fn into_partial(self) -> Result<(Option<PathBuf>, Partial), ConfigError> {
        let c_list = match self.c_list {
            Some(s) => Some(parse_list(&s).map_err(|e| ConfigError(format!("flag --c-list: {e}")))?),
            None => None,
        };
        let p = Partial {
            command: self.command,
            c: self.c,
            c_list,
            half_length: self.half_length,
            n: self.n,
            tol: self.tol,
            dt: self.dt,
            t_end: self.t_end,
            out: self.out,
            seed: self.seed,
            window: self.window,
            input: self.input,
            all: self.all.then_some(true),
        };
        Ok((self.config, p))
    }
}

fn load(cli: Cli) -> Result<RunConfig, ConfigError> {
    let (file, flags) = cli.into_partial()?;
    let base = match file {
        Some(path) => read_config(&path)?,
        None => Partial::default(),
    };
    RunConfig::resolve(base.merge(flags))
}

fn main() -> ExitCode {
    let cfg = match load(Cli::parse()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&cfg) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if outcome.failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                for path in &outcome.failed {
                    eprintln!("check failed: see {}", path.display());
                }
                ExitCode::from(1)
            }
        }
        Err(commands::RunError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(commands::RunError::Core(e)) => {
            eprintln!("error: {e}");
            let status = if matches!(e, whitham_core::Error::Subcritical(_)) { 2 } else { 1 };
            ExitCode::from(status)
        }
    }
}
