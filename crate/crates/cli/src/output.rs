//! CSV and sidecar writers.
//!
//! The CSV schema is the same for every experiment: one header row naming
//! `grid_value,policy,mean_outage,ci_low,ci_high,revenue,bits`, then one row
//! per grid point and policy, comma-separated, UTF-8, LF line endings.
//! Floats print in shortest round-trip form, so identical results are
//! identical bytes.
//!
//! Next to each CSV lands a JSON sidecar recording the tool version, the
//! command, the seed and trial count, the effective configuration with every
//! default applied, and a hash of that configuration. A run is reproducible
//! from the sidecar alone.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use acops_core::netsim::SweepRow;

use crate::config::RunConfig;
use crate::CliError;

/// Provenance record written next to every CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub trials: u64,
    /// SHA-256 of the compact JSON serialization of `effective_config`.
    pub config_sha256: String,
    pub effective_config: RunConfig,
}

impl Sidecar {
    pub fn new(command: &str, seed: u64, trials: u64, config: &RunConfig) -> Result<Self, CliError> {
        let compact = serde_json::to_string(config)
            .map_err(|e| CliError::Config(format!("serializing effective config: {e}")))?;
        let digest = Sha256::digest(compact.as_bytes());
        let mut hash = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hash, "{byte:02x}");
        }
        Ok(Sidecar {
            tool: "acops".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            trials,
            config_sha256: hash,
            effective_config: config.clone(),
        })
    }
}

/// `results.csv` gets its sidecar at `results.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut text = String::from("grid_value,policy,mean_outage,ci_low,ci_high,revenue,bits\n");
    for row in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            row.grid_value, row.policy, row.mean_outage, row.ci_low, row.ci_high, row.revenue, row.bits
        );
    }
    text
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

/// Writes the sidecar first, then the CSV: output never exists without its
/// provenance record.
pub fn write_outputs(out: &Path, rows: &[SweepRow], sidecar: &Sidecar) -> Result<PathBuf, CliError> {
    let meta = serde_json::to_string_pretty(sidecar)
        .map_err(|e| CliError::Config(format!("serializing sidecar: {e}")))?;
    let meta_path = sidecar_path(out);
    write_file(&meta_path, &(meta + "\n"))?;
    write_file(out, &render_csv(rows))?;
    Ok(meta_path)
}
