//! End-to-end Monte Carlo experiments over a cooperative group.
//!
//! A group holds N users with imperfect direct links to the base station and
//! one potential helper with surplus rate to sell. Each trial draws fresh
//! fading on every link, identifies the users whose direct rate falls short
//! of their target, runs the configured partner-selection policy, and scores
//! achieved rates and outages. Sweeps repeat this over a parameter grid and
//! aggregate confidence intervals, expected revenue, and signaling overhead.

use crate::auction::{run_auction, AuctionConfig, PricingRule};
use crate::bundle::{
    bundle_values, partition_uniform, run_bundle_auction, BundleAuctionOptions, BundleBidMatrix,
};
use crate::channel::{capacity, draw_fading, OfdmModel};
use crate::error::{Error, Result};
use crate::rng::{collect_trials, point_seed};
use crate::special::ln_factorial;
use crate::stats::binomial_ci;
use crate::valuation::private_value;
use rand::Rng;

/// How the helper's surplus is allocated among requesting users.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionPolicy {
    /// Everyone keeps their direct rate.
    NoCooperation,
    /// Uniform pick among requesters.
    RandomSelection,
    /// Requester with the strongest instantaneous helper link.
    MaxSnr,
    /// Second-price auction on the signed value of cooperation.
    AcopsSingle,
    /// Per-bundle second-price auctions over OFDM subcarriers.
    AcopsBundle,
    /// Full-information allocation maximizing the minimum achieved rate.
    CentralMaxMin,
    /// Full-information allocation maximizing the total rate gain.
    CentralOpportunistic,
}

impl SelectionPolicy {
    pub const ALL: [SelectionPolicy; 7] = [
        SelectionPolicy::NoCooperation,
        SelectionPolicy::RandomSelection,
        SelectionPolicy::MaxSnr,
        SelectionPolicy::AcopsSingle,
        SelectionPolicy::AcopsBundle,
        SelectionPolicy::CentralMaxMin,
        SelectionPolicy::CentralOpportunistic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SelectionPolicy::NoCooperation => "no_cooperation",
            SelectionPolicy::RandomSelection => "random_selection",
            SelectionPolicy::MaxSnr => "max_snr",
            SelectionPolicy::AcopsSingle => "acops_single",
            SelectionPolicy::AcopsBundle => "acops_bundle",
            SelectionPolicy::CentralMaxMin => "central_max_min",
            SelectionPolicy::CentralOpportunistic => "central_opportunistic",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        SelectionPolicy::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::domain(format!("unknown policy '{name}'")))
    }
}

/// Frequency-selective extension: the group communicates over `k_tilde`
/// subcarriers shaped by an `num_taps`-tap power-delay profile. Per-user
/// mean SNRs in [`NetworkConfig`] then apply per subcarrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OfdmConfig {
    pub k_tilde: usize,
    pub num_taps: usize,
}

/// Static description of one cooperative group.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Number of users that may fall short of their target rate.
    pub n_weak: usize,
    /// Target rate D_i per user (bits/s/Hz).
    pub desired_rates: Vec<f64>,
    /// Surplus rate the helper offers for sale (bits/s/Hz), further capped
    /// per trial by the helper's own base-station link capacity.
    pub helper_surplus: f64,
    /// Mean SNR of the helper's base-station link (linear).
    pub helper_bs_snr: f64,
    /// Mean direct-link SNR per user (linear).
    pub direct_snrs: Vec<f64>,
    /// Mean helper-link SNR per user (linear).
    pub helper_link_snrs: Vec<f64>,
    /// Number of simultaneous partners r (bundle count in OFDM mode).
    pub num_partners: usize,
    /// Fraction of relayed capacity available to the winner (0.5 or 1.0).
    pub half_duplex_factor: f64,
    pub ofdm: Option<OfdmConfig>,
    pub trials: u64,
    pub seed: u64,
}

impl NetworkConfig {
    /// A group of `n` identical users; the common case for the sweeps.
    pub fn symmetric(
        n: usize,
        desired_rate: f64,
        helper_surplus: f64,
        helper_bs_snr: f64,
        direct_snr: f64,
        helper_link_snr: f64,
    ) -> Self {
        NetworkConfig {
            n_weak: n,
            desired_rates: vec![desired_rate; n],
            helper_surplus,
            helper_bs_snr,
            direct_snrs: vec![direct_snr; n],
            helper_link_snrs: vec![helper_link_snr; n],
            num_partners: 1,
            half_duplex_factor: 1.0,
            ofdm: None,
            trials: 10_000,
            seed: crate::rng::DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_weak < 1 {
            return Err(Error::domain("group needs at least one weak user"));
        }
        for (name, v) in [
            ("desired_rates", &self.desired_rates),
            ("direct_snrs", &self.direct_snrs),
            ("helper_link_snrs", &self.helper_link_snrs),
        ] {
            if v.len() != self.n_weak {
                return Err(Error::domain(format!(
                    "{name} has {} entries for {} users",
                    v.len(),
                    self.n_weak
                )));
            }
            if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::domain(format!("{name} entries must be positive and finite")));
            }
        }
        if !(self.helper_surplus >= 0.0) {
            return Err(Error::domain("helper surplus rate must be >= 0"));
        }
        if !(self.helper_bs_snr > 0.0) {
            return Err(Error::domain("helper base-station SNR must be positive"));
        }
        if self.num_partners < 1 || self.num_partners > self.n_weak {
            return Err(Error::domain(format!(
                "partner count {} outside 1..={}",
                self.num_partners, self.n_weak
            )));
        }
        if self.half_duplex_factor != 0.5 && self.half_duplex_factor != 1.0 {
            return Err(Error::domain("half-duplex factor must be 0.5 or 1.0"));
        }
        if let Some(ofdm) = &self.ofdm {
            if ofdm.k_tilde < 1 || ofdm.num_taps < 1 {
                return Err(Error::domain("OFDM needs at least one subcarrier and one tap"));
            }
            if ofdm.num_taps > ofdm.k_tilde {
                return Err(Error::domain("more channel taps than subcarriers"));
            }
            if self.num_partners > ofdm.k_tilde {
                return Err(Error::domain("more partners than subcarriers to bundle"));
            }
        }
        if self.trials < 1 {
            return Err(Error::domain("need at least one trial"));
        }
        Ok(())
    }
}

/// One realization of every link in the group.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDraw {
    /// Instantaneous direct-link SNR per user.
    pub direct_snr: Vec<f64>,
    /// Instantaneous helper-link SNR per user.
    pub helper_snr: Vec<f64>,
    /// Instantaneous SNR of the helper's own base-station link.
    pub helper_bs_snr: f64,
}

impl TrialDraw {
    /// Draws fresh fading on all 2N+1 links. The draw order is fixed so that
    /// different policies evaluated on the same random stream see identical
    /// channels.
    pub fn sample<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<TrialDraw> {
        let direct_snr = config
            .direct_snrs
            .iter()
            .map(|&g| draw_fading(g, rng))
            .collect::<Result<Vec<_>>>()?;
        let helper_snr = config
            .helper_link_snrs
            .iter()
            .map(|&g| draw_fading(g, rng))
            .collect::<Result<Vec<_>>>()?;
        let helper_bs_snr = draw_fading(config.helper_bs_snr, rng)?;
        Ok(TrialDraw { direct_snr, helper_snr, helper_bs_snr })
    }
}

/// Result of one trial: rates, outage flags, and the money that moved.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub achieved_rates: Vec<f64>,
    pub outage: Vec<bool>,
    pub winners: Vec<bool>,
    /// Payment made by each user; nonzero only for auction winners.
    pub payments: Vec<f64>,
    /// Helper income; equals the sum of payments.
    pub revenue: f64,
    /// Users whose direct rate fell short this trial.
    pub num_requesters: usize,
    /// Requesters holding positive private values (auction policies only).
    pub num_bidders: usize,
    pub auction_held: bool,
}

// Rate added by relaying through the helper for user i, honoring the
// half-duplex factor and the surplus cap.
fn coop_gain(config: &NetworkConfig, helper_snr: f64, r_c: f64) -> Result<f64> {
    Ok((config.half_duplex_factor * capacity(helper_snr)?).min(r_c))
}

/// Runs one trial of the flat-fading single-partner game on a given channel
/// realization. The random stream is used only for selection tie-breaks and
/// the random-selection policy.
pub fn run_trial_with_draw<R: Rng + ?Sized>(
    config: &NetworkConfig,
    policy: SelectionPolicy,
    draw: &TrialDraw,
    rng: &mut R,
) -> Result<TrialOutcome> {
    config.validate()?;
    if policy == SelectionPolicy::AcopsBundle {
        return Err(Error::domain(
            "bundle policy runs through the OFDM bundle experiment, not the flat trial",
        ));
    }
    let n = config.n_weak;
    let direct_rates: Vec<f64> =
        draw.direct_snr.iter().map(|&g| capacity(g)).collect::<Result<Vec<_>>>()?;
    let requesters: Vec<usize> =
        (0..n).filter(|&i| direct_rates[i] < config.desired_rates[i]).collect();
    // The helper cannot relay faster than its own uplink carries.
    let r_c = config.helper_surplus.min(capacity(draw.helper_bs_snr)?);

    let mut achieved = direct_rates.clone();
    let mut winners = vec![false; n];
    let mut payments = vec![0.0; n];
    let mut revenue = 0.0;
    let mut num_bidders = 0;
    let mut auction_held = false;

    let selected: Option<usize> = match policy {
        SelectionPolicy::NoCooperation => None,
        SelectionPolicy::RandomSelection => {
            if requesters.is_empty() {
                None
            } else {
                Some(requesters[rng.gen_range(0..requesters.len())])
            }
        }
        SelectionPolicy::MaxSnr => requesters
            .iter()
            .copied()
            .max_by(|&a, &b| draw.helper_snr[a].total_cmp(&draw.helper_snr[b])),
        SelectionPolicy::AcopsSingle => {
            // The auction happens only with real contention and a real good.
            if requesters.len() < 2 || r_c <= 0.0 {
                None
            } else {
                auction_held = true;
                let values: Vec<f64> = requesters
                    .iter()
                    .map(|&i| {
                        let shortfall = config.desired_rates[i] - direct_rates[i];
                        let alpha = shortfall / r_c;
                        private_value(draw.helper_snr[i], draw.direct_snr[i], alpha)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let bids: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
                num_bidders = bids.iter().filter(|b| **b > 0.0).count();
                let outcome =
                    run_auction(&bids, &AuctionConfig::new(PricingRule::SecondPrice), &values, rng)?;
                if let Some(w) = outcome.winner {
                    payments[requesters[w]] = outcome.payment;
                    revenue = outcome.payment;
                    Some(requesters[w])
                } else {
                    None
                }
            }
        }
        SelectionPolicy::AcopsBundle => unreachable!("rejected above"),
        SelectionPolicy::CentralMaxMin => {
            let mut best: Option<(usize, f64)> = None;
            for &j in &requesters {
                let gain = coop_gain(config, draw.helper_snr[j], r_c)?;
                let min_rate = (0..n)
                    .map(|i| if i == j { achieved[i] + gain } else { achieved[i] })
                    .fold(f64::INFINITY, f64::min);
                if best.is_none_or(|(_, m)| min_rate > m) {
                    best = Some((j, min_rate));
                }
            }
            best.map(|(j, _)| j)
        }
        SelectionPolicy::CentralOpportunistic => {
            let mut best: Option<(usize, f64)> = None;
            for &j in &requesters {
                let gain = coop_gain(config, draw.helper_snr[j], r_c)?;
                if best.is_none_or(|(_, g)| gain > g) {
                    best = Some((j, gain));
                }
            }
            best.map(|(j, _)| j)
        }
    };

    if let Some(w) = selected {
        achieved[w] = direct_rates[w] + coop_gain(config, draw.helper_snr[w], r_c)?;
        winners[w] = true;
    }
    let outage: Vec<bool> =
        (0..n).map(|i| achieved[i] < config.desired_rates[i]).collect();
    Ok(TrialOutcome {
        achieved_rates: achieved,
        outage,
        winners,
        payments,
        revenue,
        num_requesters: requesters.len(),
        num_bidders,
        auction_held,
    })
}

/// Draws fresh channels and runs one trial.
pub fn run_trial<R: Rng + ?Sized>(
    config: &NetworkConfig,
    policy: SelectionPolicy,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let draw = TrialDraw::sample(config, rng)?;
    run_trial_with_draw(config, policy, &draw, rng)
}

/// Which parameter the sweep varies; every user gets the swept value.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    DirectSnr(Vec<f64>),
    HelperSnr(Vec<f64>),
    DesiredRate(Vec<f64>),
}

impl SweepAxis {
    fn grid(&self) -> &[f64] {
        match self {
            SweepAxis::DirectSnr(g) | SweepAxis::HelperSnr(g) | SweepAxis::DesiredRate(g) => g,
        }
    }

    fn apply(&self, base: &NetworkConfig, value: f64) -> NetworkConfig {
        let mut cfg = base.clone();
        match self {
            SweepAxis::DirectSnr(_) => cfg.direct_snrs = vec![value; cfg.n_weak],
            SweepAxis::HelperSnr(_) => cfg.helper_link_snrs = vec![value; cfg.n_weak],
            SweepAxis::DesiredRate(_) => cfg.desired_rates = vec![value; cfg.n_weak],
        }
        cfg
    }
}

/// One CSV row of an experiment: a grid point under one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub grid_value: f64,
    pub policy: String,
    pub mean_outage: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub revenue: f64,
    pub bits: f64,
}

/// Bit width used for every reported value when accounting signaling
/// overhead in sweep rows.
pub const DEFAULT_BITWIDTH: u32 = 10;

/// Sweeps a parameter grid under each policy.
///
/// Every policy at a given grid point consumes the same random substreams,
/// and channels are drawn before any policy logic runs, so policies are
/// compared on identical channel realizations.
pub fn run_montecarlo(
    config: &NetworkConfig,
    policies: &[SelectionPolicy],
    sweep: &SweepAxis,
) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if policies.is_empty() {
        return Err(Error::domain("need at least one policy"));
    }
    let mut rows = Vec::new();
    for (idx, &value) in sweep.grid().iter().enumerate() {
        let cfg = sweep.apply(config, value);
        cfg.validate()?;
        let seed = point_seed(config.seed, idx);
        for &policy in policies {
            let per_trial = collect_trials(seed, cfg.trials, |_, rng| {
                run_trial(&cfg, policy, rng).expect("validated config")
            });
            let mut outages = 0u64;
            let mut revenue_sum = 0.0;
            let mut bidder_sum = 0u64;
            for t in &per_trial {
                outages += t.outage.iter().filter(|o| **o).count() as u64;
                revenue_sum += t.revenue;
                bidder_sum += t.num_bidders as u64;
            }
            let observations = cfg.trials * cfg.n_weak as u64;
            let (mean_outage, ci_low, ci_high) = binomial_ci(outages, observations, 1.96);
            let mean_bidders = bidder_sum as f64 / cfg.trials as f64;
            let bits = policy_overhead_bits(&cfg, policy, mean_bidders)?;
            rows.push(SweepRow {
                grid_value: value,
                policy: policy.name().to_string(),
                mean_outage,
                ci_low,
                ci_high,
                revenue: revenue_sum / cfg.trials as f64,
                bits,
            });
        }
    }
    Ok(rows)
}

/// Table row selector for signaling-overhead accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackScheme {
    SinglePartnerAcops,
    SinglePartnerCentralized,
    NaiveMultipleAcops,
    BundledMultipleAcops,
    MultipleCentralized,
}

/// Inputs of one signaling-overhead evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeedbackAccount {
    pub scheme: FeedbackScheme,
    /// Group size N.
    pub n: u64,
    /// Number of actual bidders.
    pub n_a: u64,
    /// Total subcarriers.
    pub k_tilde: u64,
    /// Bundle count.
    pub k: u64,
    /// Bits per rate request.
    pub bitwidth_q: u32,
    /// Bits per bid.
    pub bitwidth_b: u32,
    /// Bits per reported channel gain.
    pub bitwidth_gamma: u32,
}

/// Global signaling overhead in bits for one selection scheme.
///
/// Auction schemes broadcast N rate requests and the actual bidders' bids;
/// multi-object auction bids cover one bid per object plus the bidder and
/// object identities. Centralized schemes collect every user's direct-link
/// gain plus all N! candidate allocation orderings' inter-user gains, per
/// subcarrier in the multiple-partner case. The factorial is evaluated in
/// floating point so large N degrades to an overflow error rather than
/// wrapping.
pub fn feedback_overhead(account: &FeedbackAccount) -> Result<f64> {
    if account.n < 1 {
        return Err(Error::domain("group size must be >= 1"));
    }
    if account.n_a > account.n {
        return Err(Error::domain("more bidders than users"));
    }
    if account.k > account.k_tilde && account.k_tilde > 0 {
        return Err(Error::domain("more bundles than subcarriers"));
    }
    let n = account.n as f64;
    let bq = account.bitwidth_q as f64;
    let bb = account.bitwidth_b as f64;
    let bg = account.bitwidth_gamma as f64;
    let centralized_single = || -> Result<f64> {
        let fact = ln_factorial(account.n).exp();
        if !fact.is_finite() {
            return Err(Error::numeric(format!(
                "factorial of {} overflows the overhead account",
                account.n
            )));
        }
        Ok(n * bg + fact * bg)
    };
    let multi_object = |objects: u64| -> Result<f64> {
        if objects < 1 {
            return Err(Error::domain("multi-object scheme needs at least one object"));
        }
        if account.n_a < 1 {
            return Err(Error::domain("multi-object scheme needs at least one bidder"));
        }
        Ok(n * bq + (account.n_a as f64).log2() + objects as f64 * bb + (objects as f64).log2())
    };
    let bits = match account.scheme {
        FeedbackScheme::SinglePartnerAcops => n * bq + account.n_a as f64 * bb,
        FeedbackScheme::SinglePartnerCentralized => centralized_single()?,
        FeedbackScheme::NaiveMultipleAcops => multi_object(account.k_tilde)?,
        FeedbackScheme::BundledMultipleAcops => multi_object(account.k)?,
        FeedbackScheme::MultipleCentralized => {
            if account.k_tilde < 1 {
                return Err(Error::domain("centralized multiple needs subcarriers"));
            }
            account.k_tilde as f64 * centralized_single()?
        }
    };
    Ok(bits)
}

// Overhead column for a sweep row: maps each policy to its accounting row.
fn policy_overhead_bits(
    config: &NetworkConfig,
    policy: SelectionPolicy,
    mean_bidders: f64,
) -> Result<f64> {
    let k_tilde = config.ofdm.map_or(1, |o| o.k_tilde as u64);
    let account = FeedbackAccount {
        scheme: FeedbackScheme::SinglePartnerAcops,
        n: config.n_weak as u64,
        n_a: (mean_bidders.round() as u64).clamp(1, config.n_weak as u64),
        k_tilde,
        k: config.num_partners as u64,
        bitwidth_q: DEFAULT_BITWIDTH,
        bitwidth_b: DEFAULT_BITWIDTH,
        bitwidth_gamma: DEFAULT_BITWIDTH,
    };
    match policy {
        SelectionPolicy::NoCooperation
        | SelectionPolicy::RandomSelection
        | SelectionPolicy::MaxSnr => Ok(0.0),
        SelectionPolicy::AcopsSingle => {
            feedback_overhead(&FeedbackAccount { scheme: FeedbackScheme::SinglePartnerAcops, ..account })
        }
        SelectionPolicy::AcopsBundle => feedback_overhead(&FeedbackAccount {
            scheme: FeedbackScheme::BundledMultipleAcops,
            n_a: config.n_weak as u64,
            ..account
        }),
        SelectionPolicy::CentralMaxMin | SelectionPolicy::CentralOpportunistic => {
            let scheme = if config.ofdm.is_some() {
                FeedbackScheme::MultipleCentralized
            } else {
                FeedbackScheme::SinglePartnerCentralized
            };
            feedback_overhead(&FeedbackAccount { scheme, ..account })
        }
    }
}

/// Outage of the bundled multiple-partner game over a decreasing-rate grid.
///
/// Per trial, every user draws a frequency-selective direct link and helper
/// link over all subcarriers. The helper splits its subcarriers into
/// `num_partners` uniform bundles and sells them; two full-information
/// references assign the same bundles, one greedily maximizing the minimum
/// rate and one maximizing the total rate, and the no-cooperation reference
/// keeps direct rates. All four are scored on the same channel draws.
pub fn run_bundle_experiment(config: &NetworkConfig, rate_grid: &[f64]) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let ofdm = config
        .ofdm
        .ok_or_else(|| Error::domain("bundle experiment needs an OFDM configuration"))?;
    if rate_grid.is_empty() {
        return Err(Error::domain("need at least one rate point"));
    }
    let n = config.n_weak;
    let r = config.num_partners;
    let partition = partition_uniform(ofdm.k_tilde, r)?;
    let direct_models: Vec<OfdmModel> = config
        .direct_snrs
        .iter()
        .map(|&g| OfdmModel::new(g, ofdm.k_tilde, ofdm.num_taps))
        .collect::<Result<Vec<_>>>()?;
    let helper_models: Vec<OfdmModel> = config
        .helper_link_snrs
        .iter()
        .map(|&g| OfdmModel::new(g, ofdm.k_tilde, ofdm.num_taps))
        .collect::<Result<Vec<_>>>()?;
    let hd = config.half_duplex_factor;

    struct PointTally {
        outages: [u64; 4],
        revenue: f64,
    }
    let mut rows = Vec::new();
    for (idx, &rate) in rate_grid.iter().enumerate() {
        if !(rate > 0.0) {
            return Err(Error::domain(format!("desired rate must be positive, got {rate}")));
        }
        let seed = point_seed(config.seed, idx);
        let tallies = collect_trials(seed, config.trials, |_, rng| {
            // Channel draws first, in fixed order, shared by all policies.
            let direct: Vec<_> = direct_models.iter().map(|m| m.draw(rng)).collect();
            let helper: Vec<_> = helper_models.iter().map(|m| m.draw(rng)).collect();
            let direct_rates: Vec<f64> = direct
                .iter()
                .map(|s| s.subcarrier_snrs.iter().map(|&g| (1.0 + g).log2()).sum())
                .collect();
            let requesters: Vec<usize> =
                (0..n).filter(|&i| direct_rates[i] < rate).collect();
            // Relayed rate user i would get from each bundle.
            let bundle_gain = |i: usize, k: usize| -> f64 {
                partition.bundles()[k]
                    .iter()
                    .map(|&j| hd * (1.0 + helper[i].subcarrier_snrs[j]).log2())
                    .sum()
            };

            let mut outages = [0u64; 4];
            // No cooperation.
            outages[0] = (0..n).filter(|&i| direct_rates[i] < rate).count() as u64;

            // Bundled auction: signed per-subcarrier values, additive bundles.
            let mut revenue = 0.0;
            let mut acops_rates = direct_rates.clone();
            if requesters.len() >= 2 {
                let per_subcarrier: Vec<Vec<f64>> = requesters
                    .iter()
                    .map(|&i| {
                        (0..ofdm.k_tilde)
                            .map(|j| helper[i].subcarrier_snrs[j] - direct[i].subcarrier_snrs[j])
                            .collect()
                    })
                    .collect();
                let grouped = bundle_values(&per_subcarrier, &partition)
                    .expect("dimensions fixed by the partition");
                let matrix = BundleBidMatrix::from_values(grouped);
                let outcome =
                    run_bundle_auction(&matrix, &BundleAuctionOptions::default(), rng)
                        .expect("matrix built from clamped values");
                revenue = outcome.revenue;
                for (k, winner) in outcome.winners.iter().enumerate() {
                    if let Some(w) = winner {
                        acops_rates[requesters[*w]] += bundle_gain(requesters[*w], k);
                    }
                }
            }
            outages[1] = (0..n).filter(|&i| acops_rates[i] < rate).count() as u64;

            // Centralized max-min: hand each bundle to the currently worst
            // requester, recomputing after every award.
            let mut central_rates = direct_rates.clone();
            if !requesters.is_empty() {
                for k in 0..r {
                    let worst = requesters
                        .iter()
                        .copied()
                        .min_by(|&a, &b| central_rates[a].total_cmp(&central_rates[b]))
                        .expect("nonempty requester set");
                    central_rates[worst] += bundle_gain(worst, k);
                }
            }
            outages[2] = (0..n).filter(|&i| central_rates[i] < rate).count() as u64;

            // Centralized opportunistic: each bundle to the requester with
            // the largest rate gain on it. Gains are additive, so the
            // per-bundle argmax maximizes the total achieved rate exactly.
            let mut opp_rates = direct_rates.clone();
            if !requesters.is_empty() {
                for k in 0..r {
                    let best = requesters
                        .iter()
                        .copied()
                        .max_by(|&a, &b| bundle_gain(a, k).total_cmp(&bundle_gain(b, k)))
                        .expect("nonempty requester set");
                    opp_rates[best] += bundle_gain(best, k);
                }
            }
            outages[3] = (0..n).filter(|&i| opp_rates[i] < rate).count() as u64;

            PointTally { outages, revenue }
        });

        let observations = config.trials * n as u64;
        let policies = [
            (SelectionPolicy::NoCooperation, 0usize),
            (SelectionPolicy::AcopsBundle, 1),
            (SelectionPolicy::CentralMaxMin, 2),
            (SelectionPolicy::CentralOpportunistic, 3),
        ];
        for (policy, slot) in policies {
            let outages: u64 = tallies.iter().map(|t| t.outages[slot]).sum();
            let revenue: f64 = tallies.iter().map(|t| t.revenue).sum::<f64>()
                / config.trials as f64;
            let (mean_outage, ci_low, ci_high) = binomial_ci(outages, observations, 1.96);
            let bits = policy_overhead_bits(config, policy, n as f64)?;
            rows.push(SweepRow {
                grid_value: rate,
                policy: policy.name().to_string(),
                mean_outage,
                ci_low,
                ci_high,
                revenue: if policy == SelectionPolicy::AcopsBundle { revenue } else { 0.0 },
                bits,
            });
        }
    }
    Ok(rows)
}
