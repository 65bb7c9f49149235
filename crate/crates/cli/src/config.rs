//! Run configuration: one flat JSON document covering every command.
//!
//! Every field is optional; an empty document (`{}`) is valid and yields the
//! reference setups. SNR fields are written in dB and converted to linear
//! form exactly once, in [`resolve`]; everything downstream of the resolved
//! view works in linear units. The raw document with all defaults applied is
//! echoed verbatim into the output sidecar, and re-parsing that echo yields
//! an identical configuration.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use acops_core::netsim::SelectionPolicy;
use acops_core::sequential::BiddingStrategy;

use crate::CliError;

/// All tunable knobs, in the units a user would write them in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    // Group geometry shared by the single-partner experiments.
    pub num_users: usize,
    /// Target rate D per user (bits/s/Hz).
    pub desired_rate: f64,
    /// Surplus rate the helper sells (bits/s/Hz).
    pub helper_surplus: f64,
    pub helper_bs_snr_db: f64,
    pub direct_snr_db: f64,
    pub helper_snr_db: f64,
    /// Fraction of relayed capacity the winner keeps (1.0 or 0.5).
    pub half_duplex_factor: f64,
    /// Rate-shortfall ratio entering the private value.
    pub alpha: f64,

    // `outage-single` sweep.
    /// One of `direct_snr_db`, `helper_snr_db`, `desired_rate`.
    pub sweep_axis: String,
    /// Grid in the axis units (dB for the SNR axes).
    pub sweep_grid: Vec<f64>,
    pub policies: Vec<String>,

    // OFDM group for `outage-bundle` (and bundle sizing elsewhere).
    pub k_tilde: usize,
    pub num_taps: usize,
    pub num_partners: usize,
    /// Desired-rate grid of the bundled experiment (bits/symbol).
    pub rate_grid: Vec<f64>,

    // `revenue` and `threshold`.
    pub bidder_grid: Vec<usize>,
    /// Adds a non-equilibrium pay-your-own-bid row to `revenue` output.
    pub first_price_literal: bool,
    /// Subcarriers per bundle in the threshold comparison.
    pub bundle_cardinality: u64,

    // `feedback`.
    pub feedback_users: Vec<u64>,
    pub bitwidth: u32,

    // `sequential`.
    pub strategies: Vec<String>,
    pub stages: usize,
    pub initial_budget: f64,
    /// Direct-link outage probability the budget game is calibrated to.
    pub weak_outage_target: f64,
    pub sequential_desired_rate: f64,
    pub sequential_helper_snr_db: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            num_users: 5,
            desired_rate: 10.0,
            helper_surplus: 5.0,
            helper_bs_snr_db: 20.0,
            direct_snr_db: 0.0,
            helper_snr_db: 10.0,
            half_duplex_factor: 1.0,
            alpha: 1.0,
            sweep_axis: "direct_snr_db".to_string(),
            sweep_grid: vec![7.0, 4.0, 1.0, -2.0, -5.0, -8.0, -11.0, -14.0, -17.0, -20.0],
            policies: vec![
                "no_cooperation".to_string(),
                "random_selection".to_string(),
                "max_snr".to_string(),
                "acops_single".to_string(),
                "central_max_min".to_string(),
            ],
            k_tilde: 128,
            num_taps: 8,
            num_partners: 2,
            rate_grid: vec![36.0, 32.0, 28.0, 24.0, 20.0, 16.0, 12.0, 8.0, 4.0],
            bidder_grid: vec![2, 3, 4, 5, 6, 7, 8, 9, 10],
            first_price_literal: false,
            bundle_cardinality: 10,
            feedback_users: vec![2, 3, 4, 5, 6, 7, 8],
            bitwidth: 10,
            strategies: vec![
                "conservative".to_string(),
                "conservative".to_string(),
                "aggressive".to_string(),
                "aggressive".to_string(),
                "no_help".to_string(),
                "no_help".to_string(),
            ],
            stages: 100,
            initial_budget: 5000.0,
            weak_outage_target: 0.7,
            sequential_desired_rate: 6.0,
            // 8000 linear: the budget game's value scale.
            sequential_helper_snr_db: 10.0 * 8000f64.log10(),
        }
    }
}

/// Which parameter `outage-single` sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    DirectSnrDb,
    HelperSnrDb,
    DesiredRate,
}

/// The configuration after the one dB-to-linear pass, plus parsed enums.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: RunConfig,
    pub helper_bs_snr: f64,
    pub direct_snr: f64,
    pub helper_snr: f64,
    pub axis: AxisKind,
    /// Sweep grid in linear units (equal to the raw grid on the rate axis).
    pub sweep_grid_linear: Vec<f64>,
    pub policies: Vec<SelectionPolicy>,
    pub strategies: Vec<BiddingStrategy>,
    pub sequential_helper_snr: f64,
    /// Direct-link SNR calibrated so the game's baseline outage hits the
    /// configured target.
    pub sequential_bs_snr: f64,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn field_err(field: &str, what: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("config field `{field}`: {what}"))
}

/// Reads and parses the configuration file; `None` means all defaults.
pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config: {e}")))
}

/// Validates the raw document and performs the single dB-to-linear pass.
pub fn resolve(raw: &RunConfig) -> Result<Resolved, CliError> {
    if raw.num_users < 1 {
        return Err(field_err("num_users", "group needs at least one user"));
    }
    for (name, v) in [
        ("desired_rate", raw.desired_rate),
        ("alpha", raw.alpha),
        ("sequential_desired_rate", raw.sequential_desired_rate),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(field_err(name, format!("must be positive and finite, got {v}")));
        }
    }
    for (name, v) in [
        ("helper_surplus", raw.helper_surplus),
        ("initial_budget", raw.initial_budget),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(field_err(name, format!("must be >= 0 and finite, got {v}")));
        }
    }
    if raw.half_duplex_factor != 0.5 && raw.half_duplex_factor != 1.0 {
        return Err(field_err("half_duplex_factor", "must be 0.5 or 1.0"));
    }
    if !(raw.weak_outage_target > 0.0 && raw.weak_outage_target < 1.0) {
        return Err(field_err("weak_outage_target", "must lie strictly between 0 and 1"));
    }
    if raw.sweep_grid.is_empty() {
        return Err(field_err("sweep_grid", "needs at least one point"));
    }
    if raw.rate_grid.is_empty() || raw.rate_grid.iter().any(|&r| !(r > 0.0)) {
        return Err(field_err("rate_grid", "needs at least one positive rate"));
    }
    if raw.bidder_grid.is_empty() || raw.bidder_grid.iter().any(|&n| n < 1) {
        return Err(field_err("bidder_grid", "needs at least one bidder count >= 1"));
    }
    if raw.feedback_users.is_empty() || raw.feedback_users.iter().any(|&n| n < 1) {
        return Err(field_err("feedback_users", "needs at least one group size >= 1"));
    }
    if raw.bundle_cardinality < 1 {
        return Err(field_err("bundle_cardinality", "must be >= 1"));
    }
    if raw.bitwidth < 1 {
        return Err(field_err("bitwidth", "must be >= 1"));
    }
    if raw.k_tilde < 1 {
        return Err(field_err("k_tilde", "needs at least one subcarrier"));
    }
    if raw.num_taps < 1 || raw.num_taps > raw.k_tilde {
        return Err(field_err("num_taps", "must lie in 1..=k_tilde"));
    }
    if raw.num_partners < 1 || raw.num_partners > raw.k_tilde {
        return Err(field_err("num_partners", "must lie in 1..=k_tilde"));
    }
    if raw.stages < 1 {
        return Err(field_err("stages", "needs at least one stage"));
    }
    let axis = match raw.sweep_axis.as_str() {
        "direct_snr_db" => AxisKind::DirectSnrDb,
        "helper_snr_db" => AxisKind::HelperSnrDb,
        "desired_rate" => AxisKind::DesiredRate,
        other => {
            return Err(field_err(
                "sweep_axis",
                format!("unknown axis `{other}`, expected `direct_snr_db`, `helper_snr_db`, or `desired_rate`"),
            ))
        }
    };
    if axis == AxisKind::DesiredRate && raw.sweep_grid.iter().any(|&v| !(v > 0.0)) {
        return Err(field_err("sweep_grid", "desired rates must be positive"));
    }
    if raw.policies.is_empty() {
        return Err(field_err("policies", "needs at least one policy"));
    }
    let policies = raw
        .policies
        .iter()
        .map(|name| SelectionPolicy::from_name(name))
        .collect::<acops_core::Result<Vec<_>>>()
        .map_err(|e| field_err("policies", e))?;
    if raw.strategies.is_empty() {
        return Err(field_err("strategies", "needs at least one participant"));
    }
    let strategies = raw
        .strategies
        .iter()
        .map(|name| BiddingStrategy::from_name(name))
        .collect::<acops_core::Result<Vec<_>>>()
        .map_err(|e| field_err("strategies", e))?;

    let sweep_grid_linear = match axis {
        AxisKind::DesiredRate => raw.sweep_grid.clone(),
        AxisKind::DirectSnrDb | AxisKind::HelperSnrDb => {
            raw.sweep_grid.iter().map(|&db| db_to_linear(db)).collect()
        }
    };
    let sequential_bs_snr =
        acops_core::channel::snr_for_direct_outage(raw.sequential_desired_rate, raw.weak_outage_target)
            .map_err(|e| field_err("weak_outage_target", e))?;

    Ok(Resolved {
        raw: raw.clone(),
        helper_bs_snr: db_to_linear(raw.helper_bs_snr_db),
        direct_snr: db_to_linear(raw.direct_snr_db),
        helper_snr: db_to_linear(raw.helper_snr_db),
        axis,
        sweep_grid_linear,
        policies,
        strategies,
        sequential_helper_snr: db_to_linear(raw.sequential_helper_snr_db),
        sequential_bs_snr,
    })
}
