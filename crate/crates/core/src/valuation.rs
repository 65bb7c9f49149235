//! Private values and their distributions.
//!
//! A weak user's value for cooperation is the SNR opportunity cost
//! gamma_ph / alpha - gamma_bs: what the helper's link is worth relative to
//! the direct link, weighted by how much of the helper's surplus rate the
//! user actually needs. Values may be negative; only bids are clamped at
//! zero.
//!
//! Bundle values add per-subcarrier values. In the regime where the helper
//! link dominates, the positive part of a single value is exponential and a
//! bundle of c_k such values is Erlang(c_k); those are the distributions used
//! by the closed forms.

use crate::error::{Error, Result};
use crate::special::reg_lower_gamma_int;
use rand::Rng;
use rand_distr::Exp1;

/// Signed private value of cooperation: gamma_ph / alpha - gamma_bs.
pub fn private_value(gamma_ph: f64, gamma_bs: f64, alpha: f64) -> Result<f64> {
    if gamma_ph < 0.0 || gamma_bs < 0.0 {
        return Err(Error::domain("instantaneous SNRs must be nonnegative"));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    Ok(gamma_ph / alpha - gamma_bs)
}

/// Distribution parameters of one bidder's private value.
///
/// The density is two-sided exponential in shape: proportional to
/// e^(-alpha x / gamma_bar_ph) for x > 0 and e^(alpha x / gamma_bar_bs) for
/// x < 0, with normalizer lambda = gamma_bar_ph + gamma_bar_bs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivateValueModel {
    pub gamma_bar_ph: f64,
    pub gamma_bar_bs: f64,
    pub alpha: f64,
    /// Cached normalizer gamma_bar_ph + gamma_bar_bs.
    pub lambda: f64,
}

impl PrivateValueModel {
    pub fn new(gamma_bar_ph: f64, gamma_bar_bs: f64, alpha: f64) -> Result<Self> {
        if !(gamma_bar_ph > 0.0) || !(gamma_bar_bs > 0.0) {
            return Err(Error::domain(format!(
                "mean SNRs must be positive, got {gamma_bar_ph} and {gamma_bar_bs}"
            )));
        }
        if !(alpha > 0.0) {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(PrivateValueModel {
            gamma_bar_ph,
            gamma_bar_bs,
            alpha,
            lambda: gamma_bar_ph + gamma_bar_bs,
        })
    }

    /// Probability density of the private value at `x`.
    pub fn pdf(&self, x: f64) -> f64 {
        let scale = self.alpha / self.lambda;
        if x >= 0.0 {
            scale * (-self.alpha * x / self.gamma_bar_ph).exp()
        } else {
            scale * (self.alpha * x / self.gamma_bar_bs).exp()
        }
    }

    /// Cumulative distribution of the private value at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.gamma_bar_bs / self.lambda * (self.alpha * x / self.gamma_bar_bs).exp()
        } else {
            (self.lambda - self.gamma_bar_ph * (-self.alpha * x / self.gamma_bar_ph).exp())
                / self.lambda
        }
    }

    /// Probability that the value is positive, i.e. that this bidder would
    /// place a bid: gamma_bar_ph / (gamma_bar_ph + gamma_bar_bs).
    pub fn positive_value_prob(&self) -> f64 {
        self.gamma_bar_ph / self.lambda
    }

    /// Draws an exact signed value from fresh fading realizations of both
    /// links.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e_ph: f64 = rng.sample(Exp1);
        let e_bs: f64 = rng.sample(Exp1);
        self.gamma_bar_ph * e_ph / self.alpha - self.gamma_bar_bs * e_bs
    }
}

/// Distribution parameters of a bundle value: the sum of `cardinality`
/// helper-link dominated values, Erlang(cardinality) with scale
/// `gamma_bar_ph`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundleValueModel {
    pub gamma_bar_ph: f64,
    pub cardinality: u64,
}

impl BundleValueModel {
    pub fn new(gamma_bar_ph: f64, cardinality: u64) -> Result<Self> {
        if cardinality < 1 {
            return Err(Error::domain("bundle cardinality must be >= 1"));
        }
        if !(gamma_bar_ph > 0.0) {
            return Err(Error::domain(format!("mean SNR must be positive, got {gamma_bar_ph}")));
        }
        Ok(BundleValueModel { gamma_bar_ph, cardinality })
    }

    /// Mean bundle value: cardinality * gamma_bar_ph.
    pub fn mean(&self) -> f64 {
        self.cardinality as f64 * self.gamma_bar_ph
    }

    /// Erlang density of the bundle value at `y` (zero for y < 0).
    pub fn pdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        let n = self.cardinality;
        let g = self.gamma_bar_ph;
        // (1/g)^n y^(n-1) e^(-y/g) / (n-1)!, built up iteratively to avoid
        // overflowing the factorial for wide bundles.
        let mut value = (-y / g).exp() / g;
        for m in 1..n {
            value *= y / (g * m as f64);
        }
        value
    }

    /// Erlang cdf of the bundle value: the regularized lower incomplete
    /// gamma function of order `cardinality` at y / gamma_bar_ph.
    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        reg_lower_gamma_int(self.cardinality, y / self.gamma_bar_ph)
            .expect("cardinality validated at construction")
    }

    /// Draws a bundle value as the sum of `cardinality` exponential draws.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut sum = 0.0;
        for _ in 0..self.cardinality {
            let e: f64 = rng.sample(Exp1);
            sum += e;
        }
        self.gamma_bar_ph * sum
    }
}
