//! Single-object sealed-bid auctions with rival uncertainty.
//!
//! Bidders know their own value and only a Poisson estimate of how many
//! rivals hold positive values. Under second-price rules the best response is
//! to bid the value itself (clamped at zero), independent of that estimate,
//! so the mechanics here are deliberately simple: clamp, rank, settle.
//!
//! There is no equilibrium bid function for the first-price rule in the
//! underlying model; first-price revenue is simulated with the bid shading
//! implied by revenue equivalence (see [`FirstPriceBid`]).

use crate::error::{Error, Result};
use crate::rng::collect_trials;
use crate::stats::mean_and_stderr;
use crate::valuation::PrivateValueModel;
use rand::Rng;
use rand_distr::Poisson;

/// How the winner's payment is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PricingRule {
    /// Winner pays their own bid.
    FirstPrice,
    /// Winner pays the highest rival bid.
    SecondPrice,
}

/// Tie handling; the only supported rule is a uniformly random award.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    #[default]
    UniformRandom,
}

/// Auction configuration. The reserve price is fixed at zero: a zero bid
/// signals abstention and can never win.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuctionConfig {
    pub pricing_rule: PricingRule,
    pub reserve_price: f64,
    pub tie_rule: TieRule,
}

impl AuctionConfig {
    pub fn new(pricing_rule: PricingRule) -> Self {
        AuctionConfig { pricing_rule, reserve_price: 0.0, tie_rule: TieRule::UniformRandom }
    }
}

/// A bidder's private type: value, rival-count estimate, and budget
/// (infinite outside the sequential game).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidderType {
    pub private_value: f64,
    pub rival_estimate: u64,
    pub budget: f64,
}

impl BidderType {
    pub fn new(private_value: f64, rival_estimate: u64) -> Self {
        BidderType { private_value, rival_estimate, budget: f64::INFINITY }
    }
}

/// Result of one auction.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    /// Index of the winner; absent when no bid beat the zero reserve.
    pub winner: Option<usize>,
    /// What the winner paid (zero when there was no sale).
    pub payment: f64,
    /// Realized payoff per bidder; losers get exactly zero.
    pub payoffs: Vec<f64>,
    /// The submitted bids.
    pub bids: Vec<f64>,
}

/// Draws a bidder's estimate of the number of rivals: Poisson with mean
/// `zeta`.
pub fn estimate_rivals<R: Rng + ?Sized>(zeta: f64, rng: &mut R) -> Result<u64> {
    if zeta < 0.0 || !zeta.is_finite() {
        return Err(Error::domain(format!("rival estimate mean must be >= 0, got {zeta}")));
    }
    if zeta == 0.0 {
        return Ok(0);
    }
    let pois = Poisson::new(zeta).map_err(|e| Error::domain(format!("poisson: {e}")))?;
    let draw: f64 = rng.sample(pois);
    Ok(draw as u64)
}

/// Equilibrium bid under the second-price rule: bid the value itself,
/// clamped at zero. The rival estimate does not enter.
pub fn best_response(private_value: f64, _rival_estimate: u64) -> f64 {
    private_value.max(0.0)
}

/// Settles one sealed-bid auction over nonnegative bids.
///
/// The highest bid wins with ties broken uniformly at random; a sale needs a
/// bid strictly above the zero reserve. `values` supplies each bidder's true
/// value for payoff accounting.
pub fn run_auction<R: Rng + ?Sized>(
    bids: &[f64],
    config: &AuctionConfig,
    values: &[f64],
    rng: &mut R,
) -> Result<AuctionOutcome> {
    if bids.is_empty() {
        return Err(Error::domain("auction needs at least one bid"));
    }
    if bids.len() != values.len() {
        return Err(Error::domain(format!(
            "bid and value lists differ in length: {} vs {}",
            bids.len(),
            values.len()
        )));
    }
    if let Some(bad) = bids.iter().find(|b| **b < 0.0 || !b.is_finite()) {
        return Err(Error::domain(format!("bids must be finite and >= 0, got {bad}")));
    }

    let top = bids.iter().cloned().fold(0.0f64, f64::max);
    let mut payoffs = vec![0.0; bids.len()];
    if top <= config.reserve_price {
        return Ok(AuctionOutcome { winner: None, payment: 0.0, payoffs, bids: bids.to_vec() });
    }
    let leaders: Vec<usize> =
        (0..bids.len()).filter(|&i| bids[i] == top).collect();
    let winner = leaders[if leaders.len() == 1 { 0 } else { rng.gen_range(0..leaders.len()) }];
    let rival_best = bids
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != winner)
        .map(|(_, b)| *b)
        .fold(0.0f64, f64::max);
    let payment = match config.pricing_rule {
        PricingRule::SecondPrice => rival_best,
        PricingRule::FirstPrice => bids[winner],
    };
    payoffs[winner] = values[winner] - payment;
    Ok(AuctionOutcome { winner: Some(winner), payment, payoffs, bids: bids.to_vec() })
}

/// First-price bid shading derived from revenue equivalence.
///
/// The equilibrium bid for a value x > 0 against n-1 symmetric rivals whose
/// clamped values have cdf F is x - (integral of F^(n-1) from 0 to x) /
/// F(x)^(n-1). Values are tabulated on a dense grid and interpolated.
#[derive(Debug, Clone)]
pub struct FirstPriceBid {
    step: f64,
    bids: Vec<f64>,
    upper: f64,
    tail_integral: f64,
}

impl FirstPriceBid {
    const GRID: usize = 4096;

    pub fn new(model: &PrivateValueModel, n_bidders: usize) -> Result<Self> {
        if n_bidders < 1 {
            return Err(Error::domain("need at least one bidder"));
        }
        // Beyond this point the clamped-value cdf is 1 up to ~1e-21.
        let upper = model.gamma_bar_ph / model.alpha * 48.0;
        let step = upper / (Self::GRID - 1) as f64;
        let p = (n_bidders - 1) as i32;
        let mut bids = Vec::with_capacity(Self::GRID);
        let mut cum = 0.0;
        let mut prev = model.cdf(0.0).powi(p);
        bids.push(0.0);
        for i in 1..Self::GRID {
            let x = i as f64 * step;
            let cur = model.cdf(x).powi(p);
            cum += 0.5 * (prev + cur) * step;
            prev = cur;
            bids.push(x - cum / cur);
        }
        Ok(FirstPriceBid { step, bids, upper, tail_integral: cum })
    }

    /// Equilibrium bid for a signed private value.
    pub fn bid(&self, value: f64) -> f64 {
        if value <= 0.0 {
            return 0.0;
        }
        if value >= self.upper {
            // F is numerically 1 out here.
            return value - (self.tail_integral + (value - self.upper));
        }
        let pos = value / self.step;
        let i = pos as usize;
        let frac = pos - i as f64;
        self.bids[i] * (1.0 - frac) + self.bids[i + 1] * frac
    }
}

/// Monte Carlo revenue estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenueEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub trials: u64,
}

/// Estimates the seller's expected revenue from `n_bidders` symmetric
/// bidders over `trials` independent auctions.
///
/// Bidders bid only when their value is positive. Under the second-price
/// rule they bid truthfully; under the first-price rule they shade per
/// [`FirstPriceBid`], which is the revenue-equivalence bid function (no
/// first-price equilibrium is specified by the model itself).
pub fn simulate_revenue(
    model: &PrivateValueModel,
    n_bidders: usize,
    config: &AuctionConfig,
    trials: u64,
    seed: u64,
) -> Result<RevenueEstimate> {
    if n_bidders < 1 {
        return Err(Error::domain("need at least one bidder"));
    }
    if trials < 1 {
        return Err(Error::domain("need at least one trial"));
    }
    let shading = match config.pricing_rule {
        PricingRule::FirstPrice => Some(FirstPriceBid::new(model, n_bidders)?),
        PricingRule::SecondPrice => None,
    };
    let payments = collect_trials(seed, trials, |_, rng| {
        let mut best = 0.0f64;
        let mut second = 0.0f64;
        for _ in 0..n_bidders {
            let bid = best_response(model.draw(rng), 0);
            if bid > best {
                second = best;
                best = bid;
            } else if bid > second {
                second = bid;
            }
        }
        if best <= 0.0 {
            return 0.0; // no sale
        }
        match &shading {
            None => second,
            Some(fp) => fp.bid(best),
        }
    });
    let (mean, std_err) = mean_and_stderr(&payments);
    Ok(RevenueEstimate { mean, std_err, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_stream;

    #[test]
    fn rival_estimate_degenerate_and_invalid() {
        let mut rng = trial_stream(30, 0);
        for _ in 0..100 {
            assert_eq!(estimate_rivals(0.0, &mut rng).unwrap(), 0);
        }
        assert!(estimate_rivals(-1.0, &mut rng).is_err());
        assert!(estimate_rivals(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn rival_estimate_moments_match_poisson() {
        let mut rng = trial_stream(31, 0);
        let n = 1_000_000;
        let draws: Vec<f64> =
            (0..n).map(|_| estimate_rivals(3.0, &mut rng).unwrap() as f64).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;
        assert!((mean - 3.0).abs() < 0.01, "mean {mean}");
        assert!((var - 3.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn rival_estimate_zero_frequency_at_unit_mean() {
        let mut rng = trial_stream(32, 0);
        let n = 1_000_000;
        let zeros =
            (0..n).filter(|_| estimate_rivals(1.0, &mut rng).unwrap() == 0).count() as f64;
        let frac = zeros / n as f64;
        assert!((frac - (-1.0f64).exp()).abs() < 0.002, "Pr(0) {frac}");
    }

    #[test]
    fn best_response_is_clamped_value_ignoring_rivals() {
        assert_eq!(best_response(3.2, 5), 3.2);
        assert_eq!(best_response(-1.0, 0), 0.0);
        assert_eq!(best_response(-1.0, 99), 0.0);
        assert_eq!(best_response(0.0, 2), 0.0);
    }

    #[test]
    fn settlement_under_both_pricing_rules() {
        let mut rng = trial_stream(33, 0);
        let values = [3.5, 2.0, 1.0];
        let second = AuctionConfig::new(PricingRule::SecondPrice);
        let out = run_auction(&[3.0, 2.0, 1.0], &second, &values, &mut rng).unwrap();
        assert_eq!(out.winner, Some(0));
        assert_eq!(out.payment, 2.0);
        assert_eq!(out.payoffs, vec![1.5, 0.0, 0.0]);

        let first = AuctionConfig::new(PricingRule::FirstPrice);
        let out = run_auction(&[3.0, 2.0, 1.0], &first, &values, &mut rng).unwrap();
        assert_eq!(out.winner, Some(0));
        assert_eq!(out.payment, 3.0);
        assert_eq!(out.payoffs, vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn ties_split_uniformly_and_pay_the_shared_bid() {
        let mut rng = trial_stream(34, 0);
        let config = AuctionConfig::new(PricingRule::SecondPrice);
        let trials = 100_000;
        let mut first_wins = 0u64;
        for _ in 0..trials {
            let out = run_auction(&[5.0, 5.0], &config, &[5.0, 5.0], &mut rng).unwrap();
            assert_eq!(out.payment, 5.0);
            if out.winner == Some(0) {
                first_wins += 1;
            }
        }
        let frac = first_wins as f64 / trials as f64;
        assert!((frac - 0.5).abs() < 0.01, "tie split {frac}");
    }

    #[test]
    fn degenerate_auctions() {
        let mut rng = trial_stream(35, 0);
        let config = AuctionConfig::new(PricingRule::SecondPrice);
        assert!(run_auction(&[], &config, &[], &mut rng).is_err());
        assert!(run_auction(&[1.0], &config, &[1.0, 2.0], &mut rng).is_err());
        assert!(run_auction(&[-1.0], &config, &[1.0], &mut rng).is_err());
        let out = run_auction(&[0.0, 0.0], &config, &[0.0, -2.0], &mut rng).unwrap();
        assert_eq!(out.winner, None);
        assert_eq!(out.payment, 0.0);
        assert_eq!(out.payoffs, vec![0.0, 0.0]);
    }

    #[test]
    fn lone_bidder_pays_nothing_under_second_price() {
        let model = PrivateValueModel::new(1.0, 1.0, 1.0).unwrap();
        let config = AuctionConfig::new(PricingRule::SecondPrice);
        let est = simulate_revenue(&model, 1, &config, 10_000, 40).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn winner_payoff_never_negative_with_truthful_bids() {
        let model = PrivateValueModel::new(3.0, 1.0, 1.0).unwrap();
        let config = AuctionConfig::new(PricingRule::SecondPrice);
        let mut rng = trial_stream(41, 0);
        for _ in 0..10_000 {
            let values: Vec<f64> = (0..4).map(|_| model.draw(&mut rng)).collect();
            let bids: Vec<f64> = values.iter().map(|&x| best_response(x, 0)).collect();
            let out = run_auction(&bids, &config, &values, &mut rng).unwrap();
            if let Some(w) = out.winner {
                assert!(out.payoffs[w] >= 0.0, "negative payoff {}", out.payoffs[w]);
            }
        }
    }

    #[test]
    fn winner_is_argmax_of_values_whenever_any_is_positive() {
        let model = PrivateValueModel::new(5.0, 2.0, 1.0).unwrap();
        let config = AuctionConfig::new(PricingRule::SecondPrice);
        let mut rng = trial_stream(42, 0);
        for _ in 0..10_000 {
            let values: Vec<f64> = (0..5).map(|_| model.draw(&mut rng)).collect();
            let bids: Vec<f64> = values.iter().map(|&x| best_response(x, 0)).collect();
            let out = run_auction(&bids, &config, &values, &mut rng).unwrap();
            let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if best > 0.0 {
                let argmax = values.iter().position(|&v| v == best).unwrap();
                assert_eq!(out.winner, Some(argmax));
            } else {
                assert_eq!(out.winner, None);
            }
        }
    }

    #[test]
    fn first_price_shading_stays_below_value_and_is_monotone() {
        let model = PrivateValueModel::new(2.0, 1.0, 1.0).unwrap();
        let fp = FirstPriceBid::new(&model, 4).unwrap();
        let mut prev = -1.0;
        for i in 0..200 {
            let x = i as f64 * 0.25;
            let b = fp.bid(x);
            assert!(b >= 0.0 && b <= x, "bid {b} for value {x}");
            assert!(b >= prev, "shaded bid must be monotone");
            prev = b;
        }
        assert_eq!(fp.bid(-3.0), 0.0);
        // A lone first-price bidder facing a zero reserve bids zero.
        let solo = FirstPriceBid::new(&model, 1).unwrap();
        for x in [0.5, 2.0, 10.0] {
            assert!(solo.bid(x).abs() < 1e-9);
        }
    }
}
