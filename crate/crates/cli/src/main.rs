//! `acops`: command-line front end for the cooperative auction experiments.
//!
//! Usage: `acops <command> --config <path> --seed <u64> --trials <n>
//! --out <path> [--threads <n>]`. The configuration is a JSON document in
//! which every field is optional; `--seed` falls back to the `ACOPS_SEED`
//! environment variable and then to the built-in default. Commands that
//! produce CSV also write a JSON sidecar carrying the seed, the effective
//! configuration, and its hash, so any output file can be regenerated from
//! its sidecar alone. `--threads` only sets the worker pool size; output
//! bytes are identical for every value.
//!
//! Exit codes: 0 success, 1 failed validation checks, 2 configuration
//! errors, 3 I/O errors, 4 numeric errors.

// Validation spells positivity checks as `!(x > 0.0)` so that NaN fails
// them; the un-negated comparisons would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use acops_core::rng::DEFAULT_SEED;

use crate::experiments::ExperimentOutput;

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<acops_core::Error> for CliError {
    fn from(e: acops_core::Error) -> Self {
        match e {
            acops_core::Error::Domain(m) => CliError::Config(m),
            acops_core::Error::Numeric(m) => CliError::Numeric(m),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "acops",
    version,
    about = "Cooperative-auction network experiments: outage, revenue, overhead, and the budget game"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file; omitted means every default applies.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Base RNG seed; beats the ACOPS_SEED environment variable.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Monte Carlo trials (replications for `sequential`); default depends
    /// on the command.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<u64>,

    /// Output CSV path; the metadata sidecar lands next to it.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads; any value produces byte-identical output.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Weak-user outage per selection policy over a parameter sweep.
    OutageSingle,
    /// Bundled multiple-partner outage over a desired-rate sweep.
    OutageBundle,
    /// Seller revenue versus bidder count per pricing rule.
    Revenue,
    /// Bundle-versus-separate proceeds and the largest winning bundle size.
    Threshold,
    /// Signaling overhead per selection scheme over a group-size grid.
    Feedback,
    /// Multi-stage budget game: cumulative outage per bidding strategy.
    Sequential,
    /// Run the oracle and invariant suite; nonzero exit on any failure.
    Validate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::OutageSingle => "outage-single",
            Command::OutageBundle => "outage-bundle",
            Command::Revenue => "revenue",
            Command::Threshold => "threshold",
            Command::Feedback => "feedback",
            Command::Sequential => "sequential",
            Command::Validate => "validate",
        }
    }

    fn default_trials(&self) -> u64 {
        match self {
            Command::OutageSingle => 20_000,
            Command::OutageBundle => 4_000,
            Command::Revenue => 200_000,
            Command::Sequential => 100,
            Command::Validate => 100_000,
            // Closed forms only; recorded in the sidecar but never drawn.
            Command::Threshold | Command::Feedback => 1,
        }
    }

    /// Whether CSV output is the command's product (so `--out` is required).
    fn requires_out(&self) -> bool {
        !matches!(self, Command::Threshold | Command::Validate)
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("ACOPS_SEED") {
        Ok(text) => text.trim().parse::<u64>().map_err(|_| {
            CliError::Config(format!("ACOPS_SEED must be a 64-bit unsigned integer, got `{text}`"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let raw = config::load(cli.config.as_deref())?;
    let resolved = config::resolve(&raw)?;
    let seed = resolve_seed(cli.seed)?;
    let trials = cli.trials.unwrap_or_else(|| cli.command.default_trials());
    if trials < 1 {
        return Err(CliError::Config("trials: need at least one trial".to_string()));
    }
    if cli.threads == Some(0) {
        return Err(CliError::Config("threads: need at least one worker thread".to_string()));
    }

    let body = || -> Result<ExperimentOutput, CliError> {
        match cli.command {
            Command::OutageSingle => experiments::outage_single(&resolved, seed, trials),
            Command::OutageBundle => experiments::outage_bundle(&resolved, seed, trials),
            Command::Revenue => experiments::revenue(&resolved, seed, trials),
            Command::Threshold => experiments::threshold(&resolved),
            Command::Feedback => experiments::feedback(&resolved),
            Command::Sequential => experiments::sequential(&resolved, seed, trials),
            Command::Validate => experiments::validate(&resolved, seed, trials),
        }
    };
    let result = match cli.threads {
        None => body()?,
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("threads: {e}")))?;
            pool.install(body)?
        }
    };

    for line in &result.notes {
        println!("{line}");
    }
    if let Some(rows) = &result.rows {
        match &cli.out {
            Some(out) => {
                let sidecar = output::Sidecar::new(cli.command.name(), seed, trials, &raw)?;
                let meta_path = output::write_outputs(out, rows, &sidecar)?;
                println!("wrote {} rows to {} (sidecar {})", rows.len(), out.display(), meta_path.display());
            }
            None if cli.command.requires_out() => {
                return Err(CliError::Config(format!(
                    "command `{}` writes CSV: pass --out <path>",
                    cli.command.name()
                )));
            }
            None => {}
        }
    }
    Ok(result.exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
