//! Multi-stage budgeted bidding game.
//!
//! Users carry a token budget across stages. Every stage redraws all direct
//! links: users whose link supports the target rate are strong, the rest are
//! weak. One willing strong user, picked uniformly, auctions its spare
//! capacity to the weak users under the second-price rule. Winners pay
//! tokens, helpers earn them, and a bid can never exceed the bidder's
//! remaining balance, so bidding style decides how long a user can keep
//! buying help.

use crate::auction::{run_auction, AuctionConfig, PricingRule};
use crate::channel::{capacity, draw_fading, snr_for_direct_outage};
use crate::error::{Error, Result};
use crate::rng::{collect_trials, DEFAULT_SEED};
use crate::valuation::private_value;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Budget below which a bidder counts as priced out: bids this small lose to
/// any solvent rival in the reference economy, where budgets and values both
/// start in the thousands.
pub const EXHAUSTION_BUDGET: f64 = 1.0;

/// Bidding style a user follows for the whole game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiddingStrategy {
    /// Bid the private value when positive, capped by the budget; help when
    /// strong.
    Conservative,
    /// Bid the entire remaining budget on every weak stage; help when strong.
    Aggressive,
    /// Bid like a conservative user but never volunteer to help, so the
    /// budget only ever drains.
    NoHelp,
}

impl BiddingStrategy {
    pub const ALL: [BiddingStrategy; 3] =
        [BiddingStrategy::Conservative, BiddingStrategy::Aggressive, BiddingStrategy::NoHelp];

    pub fn name(&self) -> &'static str {
        match self {
            BiddingStrategy::Conservative => "conservative",
            BiddingStrategy::Aggressive => "aggressive",
            BiddingStrategy::NoHelp => "no_help",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        BiddingStrategy::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::domain(format!("unknown strategy '{name}'")))
    }

    /// Whether a strong user with this strategy offers itself as the helper.
    pub fn helps_when_strong(&self) -> bool {
        !matches!(self, BiddingStrategy::NoHelp)
    }

    fn index(&self) -> usize {
        BiddingStrategy::ALL.iter().position(|s| s == self).expect("member of ALL")
    }
}

/// Static description of one budgeted game.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialConfig {
    /// Strategy per user; the vector length sets the group size.
    pub strategies: Vec<BiddingStrategy>,
    /// Common target rate D (bits/s/Hz).
    pub desired_rate: f64,
    /// Mean direct-link SNR per user (linear).
    pub bs_snr: f64,
    /// Mean weak-to-helper link SNR (linear).
    pub helper_link_snr: f64,
    /// Starting token balance per user.
    pub initial_budget: f64,
    pub num_stages: usize,
    pub replications: u64,
    pub seed: u64,
}

impl SequentialConfig {
    /// Six users split evenly across the three strategies. The direct link is
    /// calibrated so a user is weak on 70% of stages; the helper link is
    /// strong enough that private values and budgets share a scale, which is
    /// what makes bidding style matter.
    pub fn reference() -> Self {
        SequentialConfig {
            strategies: vec![
                BiddingStrategy::Conservative,
                BiddingStrategy::Conservative,
                BiddingStrategy::Aggressive,
                BiddingStrategy::Aggressive,
                BiddingStrategy::NoHelp,
                BiddingStrategy::NoHelp,
            ],
            desired_rate: 6.0,
            bs_snr: snr_for_direct_outage(6.0, 0.7).expect("fixed calibration point"),
            helper_link_snr: 8000.0,
            initial_budget: 5000.0,
            num_stages: 100,
            replications: 100,
            seed: DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(Error::domain("strategies must name at least one user"));
        }
        if !(self.desired_rate > 0.0 && self.desired_rate.is_finite()) {
            return Err(Error::domain(format!(
                "desired_rate must be positive and finite, got {}",
                self.desired_rate
            )));
        }
        if !(self.bs_snr > 0.0 && self.bs_snr.is_finite()) {
            return Err(Error::domain(format!("bs_snr must be positive, got {}", self.bs_snr)));
        }
        if !(self.helper_link_snr > 0.0 && self.helper_link_snr.is_finite()) {
            return Err(Error::domain(format!(
                "helper_link_snr must be positive, got {}",
                self.helper_link_snr
            )));
        }
        if !(self.initial_budget >= 0.0 && self.initial_budget.is_finite()) {
            return Err(Error::domain(format!(
                "initial_budget must be >= 0, got {}",
                self.initial_budget
            )));
        }
        if self.num_stages == 0 {
            return Err(Error::domain("num_stages must be at least 1"));
        }
        if self.replications == 0 {
            return Err(Error::domain("replications must be at least 1"));
        }
        Ok(())
    }
}

/// One winner-to-helper payment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    pub replication: u64,
    pub stage: usize,
    pub payer: usize,
    pub payee: usize,
    pub amount: f64,
}

/// Aggregated trajectory of all users sharing one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortTrace {
    pub strategy: BiddingStrategy,
    /// Mean fraction of stages 1..=t spent in outage, one entry per stage.
    pub cumulative_outage: Vec<f64>,
    /// Standard error of the per-replication cohort means, per stage.
    pub outage_stderr: Vec<f64>,
    pub mean_final_budget: f64,
    /// Fraction of user-replications whose balance ever fell below
    /// [`EXHAUSTION_BUDGET`].
    pub exhausted_fraction: f64,
    /// Lower-median stage at which that first happened; `None` when most
    /// user-replications never deplete.
    pub median_exhaustion_stage: Option<usize>,
    pub total_paid: f64,
    /// User-stages on which a cohort member entered an auction.
    pub bid_stages: u64,
    pub total_earned: f64,
    /// Stages on which a cohort member sold help.
    pub help_stages: u64,
}

/// Everything one game run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialOutcome {
    /// One trace per strategy present, in [`BiddingStrategy::ALL`] order.
    pub cohorts: Vec<CohortTrace>,
    /// Every payment, in (replication, stage) order.
    pub transfers: Vec<Transfer>,
    /// Final balance per user, per replication.
    pub final_budgets: Vec<Vec<f64>>,
    /// Fraction of user-stages on which the direct link missed the target.
    pub weak_fraction: f64,
    pub auctions_held: u64,
    /// Total bidder entries across all held auctions.
    pub bidder_entries: u64,
    /// Mean rate shortfall across requesters in held auctions. Together with
    /// [`mean_surplus`](Self::mean_surplus) this locates the operating point
    /// for matching one-shot analyses.
    pub mean_shortfall: f64,
    /// Mean surplus on sale across held auctions.
    pub mean_surplus: f64,
}

struct RepOutcome {
    cohort_cum: Vec<Vec<f64>>,
    transfers: Vec<Transfer>,
    final_budgets: Vec<f64>,
    exhaust_stage: Vec<Option<usize>>,
    paid: [f64; 3],
    bid_stages: [u64; 3],
    earned: [f64; 3],
    help_stages: [u64; 3],
    weak_user_stages: u64,
    auctions: u64,
    bidder_entries: u64,
    shortfall_sum: f64,
    surplus_sum: f64,
    requester_entries: u64,
}

fn run_replication(config: &SequentialConfig, rep: u64, rng: &mut ChaCha8Rng) -> RepOutcome {
    let n = config.strategies.len();
    let d = config.desired_rate;
    let auction_cfg = AuctionConfig::new(PricingRule::SecondPrice);
    let members = cohort_members(&config.strategies);

    let mut budgets = vec![config.initial_budget; n];
    let mut outage_counts = vec![0u64; n];
    let mut exhaust_stage = vec![None; n];
    for i in 0..n {
        if budgets[i] < EXHAUSTION_BUDGET {
            exhaust_stage[i] = Some(0);
        }
    }
    let mut cohort_cum = vec![vec![0.0; config.num_stages]; BiddingStrategy::ALL.len()];
    let mut out = RepOutcome {
        cohort_cum: Vec::new(),
        transfers: Vec::new(),
        final_budgets: Vec::new(),
        exhaust_stage: Vec::new(),
        paid: [0.0; 3],
        bid_stages: [0; 3],
        earned: [0.0; 3],
        help_stages: [0; 3],
        weak_user_stages: 0,
        auctions: 0,
        bidder_entries: 0,
        shortfall_sum: 0.0,
        surplus_sum: 0.0,
        requester_entries: 0,
    };

    // `stage` indexes the inner dimension of `cohort_cum`; an iterator over
    // the outer strategy dimension would not simplify this.
    #[allow(clippy::needless_range_loop)]
    for stage in 0..config.num_stages {
        // Every link refades independently each stage.
        let mut direct = Vec::with_capacity(n);
        for _ in 0..n {
            direct.push(draw_fading(config.bs_snr, rng).expect("validated config"));
        }
        let rates: Vec<f64> =
            direct.iter().map(|&g| capacity(g).expect("nonnegative draw")).collect();
        let requesters: Vec<usize> = (0..n).filter(|&i| rates[i] < d).collect();
        let willing: Vec<usize> = (0..n)
            .filter(|&i| rates[i] >= d && config.strategies[i].helps_when_strong())
            .collect();
        out.weak_user_stages += requesters.len() as u64;

        let mut stage_outage = vec![false; n];
        for &i in &requesters {
            stage_outage[i] = true;
        }

        if !willing.is_empty() && requesters.len() >= 2 {
            let helper = willing[rng.gen_range(0..willing.len())];
            let surplus = rates[helper] - d;
            if surplus > 0.0 {
                let mut bidders = Vec::new();
                let mut bids = Vec::new();
                let mut values = Vec::new();
                let mut shortfall_sum = 0.0;
                for &i in &requesters {
                    let shortfall = d - rates[i];
                    let alpha = shortfall / surplus;
                    shortfall_sum += shortfall;
                    let helper_snr =
                        draw_fading(config.helper_link_snr, rng).expect("validated config");
                    let x = private_value(helper_snr, direct[i], alpha).expect("positive alpha");
                    let bid = match config.strategies[i] {
                        BiddingStrategy::Aggressive => budgets[i],
                        BiddingStrategy::Conservative | BiddingStrategy::NoHelp => {
                            x.max(0.0).min(budgets[i])
                        }
                    };
                    if bid > 0.0 {
                        bidders.push((i, helper_snr));
                        bids.push(bid);
                        values.push(x);
                    }
                }
                if !bids.is_empty() {
                    let auction = run_auction(&bids, &auction_cfg, &values, rng)
                        .expect("finite nonnegative bids");
                    if let Some(slot) = auction.winner {
                        let (winner, helper_snr) = bidders[slot];
                        budgets[winner] -= auction.payment;
                        budgets[helper] += auction.payment;
                        out.transfers.push(Transfer {
                            replication: rep,
                            stage,
                            payer: winner,
                            payee: helper,
                            amount: auction.payment,
                        });
                        out.paid[config.strategies[winner].index()] += auction.payment;
                        out.earned[config.strategies[helper].index()] += auction.payment;
                        out.help_stages[config.strategies[helper].index()] += 1;
                        out.auctions += 1;
                        out.bidder_entries += bids.len() as u64;
                        out.shortfall_sum += shortfall_sum;
                        out.surplus_sum += surplus;
                        out.requester_entries += requesters.len() as u64;
                        for &(i, _) in &bidders {
                            out.bid_stages[config.strategies[i].index()] += 1;
                        }
                        let boost = capacity(helper_snr).expect("nonnegative draw").min(surplus);
                        stage_outage[winner] = rates[winner] + boost < d;
                    }
                }
            }
        }

        for i in 0..n {
            if stage_outage[i] {
                outage_counts[i] += 1;
            }
            if exhaust_stage[i].is_none() && budgets[i] < EXHAUSTION_BUDGET {
                exhaust_stage[i] = Some(stage);
            }
            cohort_cum[config.strategies[i].index()][stage] +=
                outage_counts[i] as f64 / (stage + 1) as f64;
        }
    }

    for (c, row) in cohort_cum.iter_mut().enumerate() {
        if members[c] > 0 {
            for v in row.iter_mut() {
                *v /= members[c] as f64;
            }
        }
    }
    out.cohort_cum = cohort_cum;
    out.final_budgets = budgets;
    out.exhaust_stage = exhaust_stage;
    out
}

fn cohort_members(strategies: &[BiddingStrategy]) -> [usize; 3] {
    let mut members = [0usize; 3];
    for s in strategies {
        members[s.index()] += 1;
    }
    members
}

/// Plays the full game `replications` times and aggregates per-strategy
/// trajectories. Replications run in parallel on independent substreams;
/// stages within a replication are strictly ordered.
pub fn run_sequential(config: &SequentialConfig) -> Result<SequentialOutcome> {
    config.validate()?;
    let n = config.strategies.len();
    let members = cohort_members(&config.strategies);
    let reps = collect_trials(config.seed, config.replications, |rep, rng| {
        run_replication(config, rep, rng)
    });

    let rep_count = reps.len() as f64;
    let mut transfers = Vec::new();
    let mut final_budgets = Vec::with_capacity(reps.len());
    let mut weak_user_stages = 0u64;
    let mut auctions_held = 0u64;
    let mut bidder_entries = 0u64;
    let mut shortfall_sum = 0.0f64;
    let mut surplus_sum = 0.0f64;
    let mut requester_entries = 0u64;
    let mut paid = [0.0f64; 3];
    let mut earned = [0.0f64; 3];
    let mut bid_stages = [0u64; 3];
    let mut help_stages = [0u64; 3];
    let mut budget_sums = [0.0f64; 3];
    let mut exhaust_stages: Vec<Vec<Option<usize>>> = vec![Vec::new(); 3];
    let mut mean_cum = vec![vec![0.0f64; config.num_stages]; 3];
    for rep in &reps {
        transfers.extend(rep.transfers.iter().copied());
        weak_user_stages += rep.weak_user_stages;
        auctions_held += rep.auctions;
        bidder_entries += rep.bidder_entries;
        shortfall_sum += rep.shortfall_sum;
        surplus_sum += rep.surplus_sum;
        requester_entries += rep.requester_entries;
        for c in 0..3 {
            paid[c] += rep.paid[c];
            earned[c] += rep.earned[c];
            bid_stages[c] += rep.bid_stages[c];
            help_stages[c] += rep.help_stages[c];
            for (acc, v) in mean_cum[c].iter_mut().zip(&rep.cohort_cum[c]) {
                *acc += v / rep_count;
            }
        }
        for (i, s) in config.strategies.iter().enumerate() {
            budget_sums[s.index()] += rep.final_budgets[i];
            exhaust_stages[s.index()].push(rep.exhaust_stage[i]);
        }
        final_budgets.push(rep.final_budgets.clone());
    }

    let mut cohorts = Vec::new();
    for (c, strategy) in BiddingStrategy::ALL.into_iter().enumerate() {
        if members[c] == 0 {
            continue;
        }
        let mut stderr = vec![0.0f64; config.num_stages];
        if reps.len() > 1 {
            for (t, se) in stderr.iter_mut().enumerate() {
                let var = reps
                    .iter()
                    .map(|r| (r.cohort_cum[c][t] - mean_cum[c][t]).powi(2))
                    .sum::<f64>()
                    / (rep_count - 1.0);
                *se = (var / rep_count).sqrt();
            }
        }
        let user_reps = (members[c] as u64 * config.replications) as f64;
        let mut stages = exhaust_stages[c].clone();
        // None sorts above every stage so it occupies the never-depleted tail.
        stages.sort_by_key(|s| (s.is_none(), s.unwrap_or(0)));
        let median_exhaustion_stage = stages[stages.len() / 2];
        let exhausted =
            exhaust_stages[c].iter().filter(|s| s.is_some()).count() as f64 / user_reps;
        cohorts.push(CohortTrace {
            strategy,
            cumulative_outage: std::mem::take(&mut mean_cum[c]),
            outage_stderr: stderr,
            mean_final_budget: budget_sums[c] / user_reps,
            exhausted_fraction: exhausted,
            median_exhaustion_stage,
            total_paid: paid[c],
            bid_stages: bid_stages[c],
            total_earned: earned[c],
            help_stages: help_stages[c],
        });
    }

    let user_stages = (n as u64 * config.num_stages as u64 * config.replications) as f64;
    Ok(SequentialOutcome {
        cohorts,
        transfers,
        final_budgets,
        weak_fraction: weak_user_stages as f64 / user_stages,
        auctions_held,
        bidder_entries,
        mean_shortfall: if requester_entries > 0 {
            shortfall_sum / requester_entries as f64
        } else {
            0.0
        },
        mean_surplus: if auctions_held > 0 { surplus_sum / auctions_held as f64 } else { 0.0 },
    })
}
