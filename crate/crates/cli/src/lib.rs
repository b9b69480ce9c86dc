//! Batch front end for the `optpred` library.
//!
//! Subcommands read an experiment config (plus the scenario it names),
//! evaluate predictors, prescriptors, disappointment probabilities or the
//! SVP convexity check, and write one deterministic table as CSV or JSON.
//! Flags override config fields. Exit status: 0 on success, 1 on a runtime
//! failure, 2 on bad input; failures also print a one-line JSON record to
//! stderr.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, Format, MethodKind, Overrides};
use crate::error::{CliError, CliResult};
use crate::output::Table;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "OPTPRED_THREADS";

#[derive(Debug, Parser)]
#[command(name = "optpred", version, about = "Data-driven predictors and their disappointment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Scenario file; overrides the config's `scenario`.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed for the sampling methods.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodKind>,

    /// Largest lattice enumerated exactly.
    #[arg(long, global = true)]
    pub cap: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Predictor values for every decision.
    Predict,
    /// The decision each predictor prescribes.
    Prescribe,
    /// Disappointment probabilities and rates over `t_list`.
    Disappoint,
    /// Midpoint convexity of the SVP objective along the decision grid.
    Convexity,
}

impl Cli {
    /// Loads the config and applies flag overrides.
    pub fn resolve(&self) -> CliResult<ExperimentConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Usage("--config is required".into()))?;
        let mut cfg = ExperimentConfig::load(path)?;
        cfg.apply(Overrides {
            scenario: self.scenario.clone(),
            out: self.out.clone(),
            format: self.format,
            seed: self.seed,
            method: self.method,
            cap: self.cap,
        });
        Ok(cfg)
    }
}

pub fn execute(command: Command, cfg: &ExperimentConfig) -> CliResult<Table> {
    match command {
        Command::Predict => commands::cmd_predict(cfg),
        Command::Prescribe => commands::cmd_prescribe(cfg),
        Command::Disappoint => commands::cmd_disappoint(cfg),
        Command::Convexity => commands::cmd_convexity(cfg),
    }
}

/// Runs one invocation end to end, writing the table to `--out` or stdout.
pub fn run(cli: &Cli) -> CliResult<()> {
    let cfg = cli.resolve()?;
    let table = execute(cli.command, &cfg)?;
    match &cfg.output {
        Some(path) => {
            let mut buf = Vec::new();
            table.write(cfg.format(), &mut buf)?;
            std::fs::write(path, buf)
                .map_err(|e| CliError::Write(format!("{}: {e}", path.display())))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write(cfg.format(), &mut lock)?;
            lock.flush().map_err(|e| CliError::Write(e.to_string()))
        }
    }
}

/// Configures the global thread pool from [`THREADS_ENV`].
pub fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a thread count, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("{THREADS_ENV}: {e}")))
}
