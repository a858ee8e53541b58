//! Command-line driver for the treemoments library: config ingestion,
//! experiment orchestration and CSV/JSON emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod functionals;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::Context;
use error::CliError;
use output::Format;

/// `git describe` of the source tree at build time.
pub const GIT_DESCRIBE: &str = env!("TREEMOMENTS_GIT_DESCRIBE");

#[derive(Debug, Parser)]
#[command(
    name = "treemoments",
    version,
    about = "Moments of branching processes and their Brownian limits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,

    /// Record per-record runtimes in `moments` output. Makes output
    /// depend on the machine.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Perron eigenpair, Σ² and criticality of the model.
    ModelCheck,
    /// Simulated trees in canonical form with their marks.
    Simulate,
    /// Brute force, many-to-few and recursive moments side by side.
    VerifyM2f,
    /// Moment records along the configured computation paths.
    Moments,
    /// Rescaled moments against their Brownian limits.
    Convergence,
    /// Survival probabilities against Kolmogorov's estimate.
    Survival,
    /// Brownian CPP sampler against the closed-form moment.
    Cpp,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ModelCheck => "model-check",
            Command::Simulate => "simulate",
            Command::VerifyM2f => "verify-m2f",
            Command::Moments => "moments",
            Command::Convergence => "convergence",
            Command::Survival => "survival",
            Command::Cpp => "cpp",
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let loaded = config::load(&path)?;
    let ctx = Context {
        seed: cli.seed.or(loaded.config.seed).unwrap_or(0),
        out: cli.out.or_else(|| loaded.config.output.clone()),
        loaded,
        command: cli.command.name().to_string(),
        format: cli.format,
        timings: cli.timings,
    };
    log::info!("{} with seed {}", ctx.command, ctx.seed);
    match cli.command {
        Command::ModelCheck => commands::model_check(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::VerifyM2f => commands::verify_m2f(&ctx),
        Command::Moments => commands::moments(&ctx),
        Command::Convergence => commands::convergence(&ctx),
        Command::Survival => commands::survival(&ctx),
        Command::Cpp => commands::cpp(&ctx),
    }
}
