//! `iso` — construct, convert and verify isochronous potentials for
//! `x'' + g(x) = 0` from the command line.
//!
//! Every subcommand reads one problem description (a characteristic `f`, a
//! force `g`, or an Urabe function `h`), runs one pipeline, and emits two
//! artifacts: a plot-ready CSV table and a JSON summary.  With `--out BASE`
//! both land in `BASE.csv` / `BASE.json`; without it, `--format` picks which
//! one goes to stdout.  Identical inputs produce byte-identical output.
//!
//! Exit codes: 0 success (and, for `verify`/`period`, isochronous), 1 not
//! isochronous, 2 invalid input or a failed computation.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

mod commands;
mod config;
mod output;

use clap::Parser;
use std::process::ExitCode;

/// Anything that keeps a command from producing its artifacts; always exit 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Lib(#[from] isochrone::Error),
    #[error(transparent)]
    Eval(#[from] isochrone::EvalError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Parser)]
#[command(
    name = "iso",
    version,
    about = "Construct, convert and verify isochronous potentials for x'' + g(x) = 0"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Solve for the potential generated by a characteristic f and frequency lambda
    Build(config::Args),
    /// Decide whether a force g yields an isochronous center (exit 0 yes, 1 no)
    Verify(config::Args),
    /// Convert between the characteristic f and the Urabe function h
    Convert(config::Args),
    /// Measure orbital periods on an energy grid (exit 0 isochronous, 1 not)
    Period(config::Args),
    /// Taylor coefficients of the potential from a polynomial characteristic
    Series(config::Args),
    /// List the built-in closed-form reference wells
    Catalog(config::Args),
}

type Handler = fn(&config::Resolved) -> Result<u8, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, cmd): (config::Args, Handler) =
        match cli.command {
            Command::Build(a) => (a, commands::build),
            Command::Verify(a) => (a, commands::verify),
            Command::Convert(a) => (a, commands::convert),
            Command::Period(a) => (a, commands::period),
            Command::Series(a) => (a, commands::series),
            Command::Catalog(a) => (a, commands::catalog),
        };
    match config::Resolved::from_args(args).and_then(|cfg| cmd(&cfg)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
