// SPDX-License-Identifier: Apache-2.0
//! `sisnet`: simulate multi-strain SIS epidemics on multipartite networks,
//! integrate their mean-field limit, and check the two against each other.
//!
//! Exit status is 0 when every requested check passes, 1 when a check fails,
//! and 2 on any error (reported on stderr as `ERROR <CODE>: message`).

mod commands;
mod config;
mod error;
mod output;

use std::hash::{BuildHasher, RandomState};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunFile;
use crate::error::CliError;
use crate::output::OutDir;

#[derive(Parser)]
#[command(name = "sisnet", version, about = "Multi-strain SIS epidemics on multipartite networks")]
struct Cli {
    /// Network and run configuration (JSON); a previous run's manifest also works.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = "sisnet-out")]
    out: PathBuf,
    /// Master seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replica ensembles (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replace existing output files.
    #[arg(long, global = true)]
    overwrite: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Island-level Gillespie trajectories.
    Simulate,
    /// Node-level trajectories, aggregated to island counts.
    Micro,
    /// Integrate the mean-field ODE; optionally locate an equilibrium.
    Meanfield,
    /// Simulation-to-ODE distance across a size schedule.
    Converge,
    /// Compare simulated state distributions with the exact transient law.
    Exact,
    /// Martingale residual variances against their bound.
    Martingale,
    /// Check a network and print its island-level structure.
    Validate,
}

fn fresh_seed() -> u64 {
    RandomState::new().hash_one(std::process::id())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let path = cli.config.ok_or_else(|| CliError::InvalidParameter("--config <path> is required".into()))?;
    let run = RunFile::load(&path)?;
    if let Command::Validate = cli.command {
        return commands::validate(&run);
    }
    let seed = match cli.seed.or(run.seed) {
        Some(s) => s,
        None => {
            let s = fresh_seed();
            eprintln!("seed: {s}");
            s
        }
    };
    let ctx = Context { run, seed, out: OutDir::new(&cli.out, cli.overwrite) };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Simulate => commands::simulate(&ctx, false),
        Command::Micro => commands::simulate(&ctx, true),
        Command::Meanfield => commands::meanfield(&ctx),
        Command::Converge => commands::converge(&ctx),
        Command::Exact => commands::exact(&ctx),
        Command::Martingale => commands::martingale(&ctx),
        Command::Validate => unreachable!("handled above"),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ERROR {}: {e}", e.code());
            ExitCode::from(2)
        }
    }
}
