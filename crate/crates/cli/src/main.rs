//! `driftbound`: certificates, schedules and simulation checks from a
//! JSON configuration.

mod commands;
mod config;
mod error;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Output;
use crate::config::{Config, Overrides};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "driftbound", version, about = "Nonasymptotic MCMC bounds under geometric drift")]
struct Cli {
    /// Cap on worker threads. Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration document.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Ergodicity constants (rho, gamma, M) for V and V^(1/r).
    Certify(Common),
    /// Certified (m, t, n, total cost) rows.
    Schedule {
        #[command(flatten)]
        common: Common,
        /// Write the rows as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cost-minimising gamma pair (and optionally d and a).
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Write every probed (gamma, gamma_r, cost) as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the contracting-normals chain and check coverage and MSE.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, required = true)]
        seed: u64,
    },
    /// Both settings of the reference table in one run.
    Table1 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<Config, CliError> {
    let mut cfg = Config::load(common.config.as_deref())?;
    cfg.apply(&common.overrides);
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Output, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Certify(common) => commands::certify(&load(&common)?),
        Command::Schedule { common, out } => commands::schedule(&load(&common)?, out.as_deref()),
        Command::Optimize { common, out } => commands::optimize(&load(&common)?, out.as_deref()),
        Command::Verify { common, seed } => commands::verify(&load(&common)?, seed),
        Command::Table1 { common, out } => {
            let cfg = load(&common)?.or(commands::table1_preset());
            commands::table1(&cfg, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let result = run(Cli::parse()).and_then(|out| {
        std::io::stdout().lock().write_all(out.json.as_bytes())?;
        match out.violation {
            Some(v) => Err(CliError::Invariant(v)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
