//! `gridrisk` — operator CLI for the forecasting toolkit.
//!
//! Subcommands cover the desk loop end to end: generate synthetic data
//! (`synth`), scan covariate lags (`lags`), size the target quantile from
//! price asymmetry (`rho`), fit and checkpoint a model (`train`), run a
//! walk-forward evaluation (`backtest`), re-render its artifacts
//! (`report`), and compare two runs (`compare`).
//!
//! Contract: exit 0 on success; otherwise a one-line JSON object
//! `{code, message, context}` on stderr with exit 2 (config), 3 (data),
//! or 4 (numerical). Outputs land under `--out-dir` with stable names and
//! carry the tool version plus a config hash.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "gridrisk", version, about = "Reliability-first grid load forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a deterministic synthetic dataset.
    Synth(commands::synth::SynthArgs),
    /// Scan weather channels for their best load-lead lag.
    Lags(commands::lags::LagsArgs),
    /// Estimate DA/RT price asymmetry and the target quantile.
    Rho(commands::rho::RhoArgs),
    /// Fit a model on a fixed split and write its checkpoint.
    Train(commands::train::TrainArgs),
    /// Run the walk-forward backtest an experiment file describes.
    Backtest(commands::backtest::BacktestArgs),
    /// Re-render a report artifact as CSV.
    Report(commands::report::ReportArgs),
    /// Diebold-Mariano comparison of two backtests.
    Compare(commands::compare::CompareArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let err = CliError::config(e.to_string());
            eprintln!("{}", err.stderr_json());
            std::process::exit(err.exit_code());
        }
        // --help / --version
        Err(e) => {
            print!("{e}");
            std::process::exit(0);
        }
    };

    let result = match &cli.command {
        Command::Synth(args) => commands::synth::run(args),
        Command::Lags(args) => commands::lags::run(args),
        Command::Rho(args) => commands::rho::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Backtest(args) => commands::backtest::run(args),
        Command::Report(args) => commands::report::run(args),
        Command::Compare(args) => commands::compare::run(args),
    };
    if let Err(e) = result {
        eprintln!("{}", e.stderr_json());
        std::process::exit(e.exit_code());
    }
}
