//! qctl: command-line front-end for the spin-control toolkit.
//!
//! Every subcommand reads one JSON job config, writes its artifacts into
//! `--out`, and exits 0 on success, 1 when the run finished but the
//! stated goal was not reached (or an integration collapsed), and 2 on
//! invalid input. Given the same config and seed, reruns produce
//! byte-identical outputs.

mod commands;
mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::JobConfig;

/// Errors tagged with their process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed config, missing files, bad dimensions: exit 2.
    Invalid(String),
    /// The run completed but failed its goal or collapsed: exit 1.
    Failed(String),
}

impl From<qctl_core::Error> for CliError {
    fn from(e: qctl_core::Error) -> Self {
        use qctl_core::Error as E;
        match e {
            E::InvalidInput(_)
            | E::WrongObjective(_)
            | E::UndefinedAngle(_)
            | E::IndeterminateSyndrome(_) => CliError::Invalid(e.to_string()),
            E::IntegrationFailure(_) | E::TrajectoryFailure(_) | E::Uncorrectable(_) => {
                CliError::Failed(e.to_string())
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qctl",
    version,
    about = "Spin-chain gate synthesis, controllability tests, Pauli-weight analysis, open-system simulation, and pulse optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct JobArgs {
    /// JSON job configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed of the config section this command runs.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a switching schedule for a named target gate.
    Synth(JobArgs),
    /// Report the dynamical Lie-algebra dimension of the switch pair.
    Controllability(JobArgs),
    /// Pauli-weight analysis of a realized gate against its target.
    FtAnalyze(JobArgs),
    /// Integrate the open-system model as an ensemble or trajectories.
    Simulate(JobArgs),
    /// Optimize piecewise-constant control amplitudes.
    Pulse(JobArgs),
}

fn load_config(args: &JobArgs) -> Result<JobConfig, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Invalid(format!("reading {}: {e}", args.config.display())))?;
    let cfg = JobConfig::from_str(&text)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Invalid(format!("creating {}: {e}", args.out.display())))?;
    Ok(cfg)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Synth(args) => {
            let mut cfg = load_config(&args)?;
            if let (Some(s), Some(sec)) = (args.seed, cfg.synthesis.as_mut()) {
                sec.seed = s;
            }
            commands::synth(&cfg, &args.out)
        }
        Command::Controllability(args) => {
            let cfg = load_config(&args)?;
            commands::controllability(&cfg, &args.out)
        }
        Command::FtAnalyze(args) => {
            let cfg = load_config(&args)?;
            let dir = args.config.parent().unwrap_or(Path::new("."));
            commands::ft_analyze(&cfg, dir, &args.out)
        }
        Command::Simulate(args) => {
            let mut cfg = load_config(&args)?;
            if let (Some(s), Some(sec)) = (args.seed, cfg.simulate.as_mut()) {
                sec.seed = s;
            }
            commands::simulate(&cfg, &args.out)
        }
        Command::Pulse(args) => {
            let mut cfg = load_config(&args)?;
            if let (Some(s), Some(sec)) = (args.seed, cfg.pulse.as_mut()) {
                sec.seed = s;
            }
            commands::pulse(&cfg, &args.out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
