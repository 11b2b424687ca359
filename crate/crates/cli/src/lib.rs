//! Command-line front end: experiment configs, run manifests, subcommands
//! and plot-data emission.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod plots;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{dispatch, ensure_dir, Command, RunContext};
use crate::config::{ExperimentConfig, SEED_ENV};
pub use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "mhjump", version, about = "Simulate and verify Metropolis-Hastings jump processes")]
pub struct Cli {
    /// JSON experiment config; defaults apply to missing keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed. Overrides the config and MHJUMP_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory [default: config `out_dir`, else ./mhjump-out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Sub {
    /// Jump-process ensemble on the accelerated clock.
    Simulate,
    /// Reference ensemble of the limiting diffusion.
    Langevin,
    /// Generator moments, generator gaps and ensemble KS sweep over eps.
    VerifyLimit,
    /// Distance-minimization checks on finite chains.
    VerifyGeometry,
    /// Folded-normal moment orders.
    Moments,
    /// Linearised acceptance ratio bound.
    Sbound,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Simulate => Command::Simulate,
            Sub::Langevin => Command::Langevin,
            Sub::VerifyLimit => Command::VerifyLimit,
            Sub::VerifyGeometry => Command::VerifyGeometry,
            Sub::Moments => Command::Moments,
            Sub::Sbound => Command::SBound,
        }
    }
}

fn run_inner(cli: &Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let env = std::env::var(SEED_ENV).ok();
    let seed = config.resolve_seed(cli.seed, env.as_deref())?;
    config.seed = Some(seed);
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("mhjump-out"));
    let cmd = Command::from(cli.command);
    let files = cmd.outputs(&config)?;
    ensure_dir(&out_dir)?;
    let mut manifest = RunManifest::start(&config, cmd.name(), seed, files);
    manifest.write_atomic(&out_dir)?;

    let mut ctx = RunContext {
        config,
        seed,
        out_dir,
        quiet: cli.quiet,
        log: Default::default(),
    };
    let mut body = || dispatch(cmd, &mut ctx);
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("--threads {n}: {e}")))?;
            pool.install(body)?
        }
        None => body()?,
    }
    manifest.finish();
    manifest.write_atomic(&ctx.out_dir)?;
    match ctx.log.failed() {
        0 => Ok(()),
        failed => Err(CliError::Checks { failed }),
    }
}

/// Run a parsed command line and return the process exit status.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mhjump: {e}");
            e.exit_code()
        }
    }
}
