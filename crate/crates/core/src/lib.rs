//! Simulation and analysis library for auction-based cooperative partner
//! selection in fading wireless networks.
//!
//! Weak users whose direct link cannot sustain their desired rate bid for a
//! helper's surplus rate in a sealed-bid auction; bundled variants auction
//! groups of OFDM subcarriers. The crate provides:
//!
//! - channel models (Rayleigh fading, path loss, log-normal shadowing,
//!   frequency-selective OFDM) in [`channel`],
//! - private-value distributions for single links and subcarrier bundles in
//!   [`valuation`],
//! - single-object and multiple-object auction mechanics in [`auction`] and
//!   [`bundle`],
//! - closed forms, bounds, and quadrature-based expectations in [`analytic`],
//! - end-to-end network experiments, feedback accounting, and the multi-stage
//!   budget game in [`netsim`] and [`sequential`].
//!
//! Every Monte Carlo entry point takes a 64-bit seed and derives one
//! counter-mode stream per trial, so results are bit-identical regardless of
//! thread count.

// Validation spells positivity checks as `!(x > 0.0)` so that NaN fails
// them; the un-negated comparisons would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod auction;
pub mod bundle;
pub mod channel;
pub mod error;
pub mod netsim;
pub mod quad;
pub mod rng;
pub mod sequential;
pub mod special;
pub mod stats;
pub mod valuation;

pub use error::{Error, Result};
