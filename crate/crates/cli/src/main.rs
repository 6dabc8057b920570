//! `ndspin`: batch front-end of the nanodiamond spin interferometer toolkit.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use commands::Context;
use config::{Config, ConfigError};
use ndspin::Scenario;

#[derive(Debug, Parser)]
#[command(name = "ndspin", version, about = "Nanodiamond spin interferometer simulations")]
struct Cli {
    /// Scenario config (JSON). Built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for the parallel scans.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    /// Reserved. Recorded in the manifest; every computation is deterministic.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print trap frequency, separation, Casimir-Polder distance and protocol time as JSON.
    Derive,
    /// Analytic branch trajectories and integrated centre-of-mass motion.
    Trajectory,
    /// Branch phase-space curves under dynamical decoupling.
    Dd,
    /// Ramsey phase against the trap tilt.
    Ramsey,
    /// Coil field on a plane grid.
    Fieldmap,
    /// Spin-channel separation over a shell of starts, and the phase-lag scan.
    Sensitivity,
    /// Minimal protocol time over the mass and gradient grid.
    ProtocolOpt {
        /// Overrides `protocol.scenario`.
        #[arg(long, value_enum)]
        scenario: Option<ScenarioArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    HoldOnly,
    FullCycle,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::HoldOnly => Scenario::HoldOnly,
            ScenarioArg::FullCycle => Scenario::FullCycle,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(usize::from(n))
            .build_global()?;
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let ctx = Context {
        config: &config,
        out: &out,
        seed: cli.seed,
    };
    match cli.command {
        Command::Derive => commands::derive(&ctx, cli.out.is_some()),
        Command::Trajectory => commands::trajectory(&ctx),
        Command::Dd => commands::dd(&ctx),
        Command::Ramsey => commands::ramsey(&ctx),
        Command::Fieldmap => commands::fieldmap(&ctx),
        Command::Sensitivity => commands::sensitivity(&ctx),
        Command::ProtocolOpt { scenario } => commands::protocol_opt(&ctx, scenario.map(Into::into)),
    }
}

/// 2 for anything the user can fix in the config, 3 for numerical failures.
fn exit_status(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<ndspin::Error>() {
        Some(
            ndspin::Error::InvalidParameter { .. }
            | ndspin::Error::BelowMinimumDistance { .. }
            | ndspin::Error::BranchOverlap { .. },
        ) => 2,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
