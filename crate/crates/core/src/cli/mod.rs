//! Command-line front end.
//!
//! ```text
//! fractrans [--config FILE] [--seed U64] [--out DIR] [--threads K] [--set KEY=VALUE]... <COMMAND>
//! ```
//!
//! Commands: `gen-fbm`, `solve`, `validate`, `converge`. Exit status is 0 when
//! every bound report passes, 1 when some report fails and 2 on errors.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{cmd_converge, cmd_gen_fbm, cmd_solve, cmd_validate, Outcome};
pub use config::{ExperimentConfig, ENV_PREFIX, KEYS};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "fractrans", version, about = "Transport approximation of fBm and Euler schemes for fractional SDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat `key = value` config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed (overrides the `seed` key).
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Output directory (overrides the `out` key).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads; 0 or absent uses all cores.
    #[arg(long, global = true, value_name = "K")]
    pub threads: Option<usize>,

    /// Override one config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write transport-approx and/or exact fBm driver paths.
    GenFbm,
    /// Solve on one transport driver: reference Y, X-tilde and X-euler.
    Solve,
    /// Run every bound checker; nonzero exit if any report fails.
    Validate,
    /// Same-driver convergence sweep and covariance experiment.
    Converge,
    /// Print the configuration keys with their defaults.
    Keys,
}

/// Layers defaults, config file, environment and flags.
pub fn resolve_config<I, K, V>(cli: &Cli, env: I) -> Result<ExperimentConfig>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    cfg.apply_env(env)?;
    for kv in &cli.overrides {
        cfg.apply_override(kv)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    if let Some(out) = &cli.out {
        cfg.set("out", &out.to_string_lossy())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a command and returns its outcome without writing anything.
pub fn run_command(command: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    match command {
        Command::GenFbm => cmd_gen_fbm(cfg),
        Command::Solve => cmd_solve(cfg),
        Command::Validate => cmd_validate(cfg),
        Command::Converge => cmd_converge(cfg),
        Command::Keys => {
            let mut out = Outcome::default();
            for (k, d, help) in KEYS {
                let d = if d.is_empty() { "(derived)" } else { d };
                out.notes.push(format!("{k:<20} {d:<16} {help}"));
            }
            Ok(out)
        }
    }
}

fn execute(cli: &Cli, cfg: &ExperimentConfig) -> Result<Outcome> {
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Configuration(format!("--threads: {e}")))?;
    pool.install(|| run_command(cli.command, cfg))
}

/// Full CLI entry: parses `args`, runs, writes outputs, prints reports and
/// returns the exit status.
pub fn main_with<A, T, I, K, V>(args: A, env: I) -> i32
where
    A: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match resolve_config(&cli, env) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let outcome = match execute(&cli, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let written = match outcome.write_to(&cfg.out_dir()) {
        Ok(w) if !outcome.files.is_empty() => w,
        Ok(_) => Vec::new(),
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    for note in &outcome.notes {
        println!("{note}");
    }
    for r in &outcome.reports {
        println!("{r}");
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    if outcome.passed() {
        0
    } else {
        let failed = outcome.reports.iter().filter(|r| !r.pass).count();
        eprintln!("{failed} of {} reports failed", outcome.reports.len());
        1
    }
}
