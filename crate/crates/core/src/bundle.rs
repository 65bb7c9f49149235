//! Multiple-object auction formats over OFDM subcarriers.
//!
//! Three formats sell K-tilde subcarriers to the same bidders:
//!
//! - naive: every subcarrier is its own second-price auction,
//! - pure bundle: all subcarriers are sold as one object,
//! - mixed bundle: subcarriers are grouped into K bundles, each sold by an
//!   independent second-price auction.
//!
//! Bundle values are additive in the per-subcarrier values, and the naive
//! format is exactly the mixed format with singleton bundles.

use crate::error::{Error, Result};
use crate::rng::collect_trials;
use crate::valuation::PrivateValueModel;
use rand::seq::SliceRandom;
use rand::Rng;

/// A grouping of subcarriers into disjoint bundles that covers every index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundlePartition {
    bundles: Vec<Vec<usize>>,
    total_subcarriers: usize,
}

impl BundlePartition {
    /// Builds a partition from explicit index sets, enforcing that they are
    /// disjoint, nonempty, and cover 0..total exactly.
    pub fn new(bundles: Vec<Vec<usize>>, total_subcarriers: usize) -> Result<Self> {
        let mut seen = vec![false; total_subcarriers];
        let mut count = 0usize;
        for bundle in &bundles {
            if bundle.is_empty() {
                return Err(Error::domain("every bundle must hold at least one subcarrier"));
            }
            for &j in bundle {
                if j >= total_subcarriers {
                    return Err(Error::domain(format!("subcarrier index {j} out of range")));
                }
                if seen[j] {
                    return Err(Error::domain(format!("subcarrier {j} assigned twice")));
                }
                seen[j] = true;
                count += 1;
            }
        }
        if count != total_subcarriers {
            return Err(Error::domain(format!(
                "partition covers {count} of {total_subcarriers} subcarriers"
            )));
        }
        Ok(BundlePartition { bundles, total_subcarriers })
    }

    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    pub fn num_bundles(&self) -> usize {
        self.bundles.len()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.bundles.iter().map(Vec::len).collect()
    }

    pub fn total_subcarriers(&self) -> usize {
        self.total_subcarriers
    }
}

/// Groups `k_tilde` subcarriers into `n_bundles` contiguous bundles of
/// near-equal size; the first `k_tilde mod n_bundles` bundles take one extra
/// subcarrier.
pub fn partition_uniform(k_tilde: usize, n_bundles: usize) -> Result<BundlePartition> {
    if n_bundles < 1 {
        return Err(Error::domain("need at least one bundle"));
    }
    if n_bundles > k_tilde {
        return Err(Error::domain(format!(
            "cannot split {k_tilde} subcarriers into {n_bundles} nonempty bundles"
        )));
    }
    let base = k_tilde / n_bundles;
    let extra = k_tilde % n_bundles;
    let mut bundles = Vec::with_capacity(n_bundles);
    let mut next = 0usize;
    for k in 0..n_bundles {
        let size = base + usize::from(k < extra);
        bundles.push((next..next + size).collect());
        next += size;
    }
    BundlePartition::new(bundles, k_tilde)
}

/// Uniform bundle sizes over a random permutation of the subcarriers.
///
/// Contiguous subcarriers are correlated under frequency-selective fading;
/// shuffling decorrelates the members of each bundle.
pub fn partition_shuffled<R: Rng + ?Sized>(
    k_tilde: usize,
    n_bundles: usize,
    rng: &mut R,
) -> Result<BundlePartition> {
    let contiguous = partition_uniform(k_tilde, n_bundles)?;
    let mut order: Vec<usize> = (0..k_tilde).collect();
    order.shuffle(rng);
    let mut bundles = Vec::with_capacity(n_bundles);
    let mut next = 0usize;
    for size in contiguous.cardinalities() {
        bundles.push(order[next..next + size].to_vec());
        next += size;
    }
    BundlePartition::new(bundles, k_tilde)
}

/// Greedy value-balancing heuristic: assigns subcarriers in decreasing score
/// order to the not-yet-full bundle with the smallest running total.
///
/// This stands in for externally optimized bundling baselines; it is not part
/// of the auction model itself.
pub fn partition_value_balanced(scores: &[f64], n_bundles: usize) -> Result<BundlePartition> {
    let k_tilde = scores.len();
    let sizes = partition_uniform(k_tilde, n_bundles)?.cardinalities();
    let mut order: Vec<usize> = (0..k_tilde).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); n_bundles];
    let mut totals = vec![0.0f64; n_bundles];
    for j in order {
        let target = (0..n_bundles)
            .filter(|&k| bundles[k].len() < sizes[k])
            .min_by(|&a, &b| totals[a].total_cmp(&totals[b]))
            .expect("sizes sum to the subcarrier count");
        bundles[target].push(j);
        totals[target] += scores[j];
    }
    BundlePartition::new(bundles, k_tilde)
}

/// Per-bidder, per-bundle bids and true values.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleBidMatrix {
    /// bids[i][k]: bidder i's bid on bundle k, nonnegative.
    pub bids: Vec<Vec<f64>>,
    /// values[i][k]: bidder i's true (possibly negative) bundle value.
    pub values: Vec<Vec<f64>>,
}

impl BundleBidMatrix {
    /// Truthful matrix: bids are the values clamped at zero.
    pub fn from_values(values: Vec<Vec<f64>>) -> Self {
        let bids = values.iter().map(|row| row.iter().map(|v| v.max(0.0)).collect()).collect();
        BundleBidMatrix { bids, values }
    }

    fn validate(&self) -> Result<usize> {
        if self.bids.is_empty() {
            return Err(Error::domain("need at least one bidder"));
        }
        if self.bids.len() != self.values.len() {
            return Err(Error::domain("bid and value matrices differ in bidder count"));
        }
        let k = self.bids[0].len();
        for (b, v) in self.bids.iter().zip(&self.values) {
            if b.len() != k || v.len() != k {
                return Err(Error::domain("ragged bid or value matrix"));
            }
            if b.iter().any(|x| *x < 0.0 || !x.is_finite()) {
                return Err(Error::domain("bids must be finite and >= 0"));
            }
        }
        Ok(k)
    }
}

/// Sums per-subcarrier values into per-bundle values: additive valuations.
pub fn bundle_values(
    per_subcarrier_values: &[Vec<f64>],
    partition: &BundlePartition,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(per_subcarrier_values.len());
    for row in per_subcarrier_values {
        if row.len() != partition.total_subcarriers() {
            return Err(Error::domain(format!(
                "value row has {} entries for {} subcarriers",
                row.len(),
                partition.total_subcarriers()
            )));
        }
        out.push(
            partition
                .bundles()
                .iter()
                .map(|bundle| bundle.iter().map(|&j| row[j]).sum())
                .collect(),
        );
    }
    Ok(out)
}

/// Options for the mixed-bundle auction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BundleAuctionOptions {
    /// Restrict each bidder to at most one bundle win. Bundles settle in
    /// index order; a bidder who has already won is excluded from both the
    /// award and the price of later bundles.
    pub one_bundle_per_bidder: bool,
}

/// Outcome of a multi-object auction: one entry per object.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiObjectOutcome {
    /// Winner of each object, if it sold.
    pub winners: Vec<Option<usize>>,
    /// Second-price payment for each object.
    pub payments: Vec<f64>,
    /// Seller revenue: sum of payments.
    pub revenue: f64,
    /// Realized payoff per bidder, summed over their wins.
    pub payoffs: Vec<f64>,
}

// Awards one object by second price among the eligible bidders. Returns the
// winner and payment; no sale on an all-zero column.
fn settle_object<R: Rng + ?Sized>(
    column: &[(usize, f64)],
    rng: &mut R,
) -> (Option<usize>, f64) {
    let top = column.iter().map(|(_, b)| *b).fold(0.0f64, f64::max);
    if top <= 0.0 {
        return (None, 0.0);
    }
    let leaders: Vec<usize> =
        column.iter().filter(|(_, b)| *b == top).map(|(i, _)| *i).collect();
    let winner = leaders[if leaders.len() == 1 { 0 } else { rng.gen_range(0..leaders.len()) }];
    let second = column
        .iter()
        .filter(|(i, _)| *i != winner)
        .map(|(_, b)| *b)
        .fold(0.0f64, f64::max);
    (Some(winner), second)
}

/// Runs the mixed-bundle auction: each bundle is an independent second-price
/// auction. A bidder may win several bundles unless
/// [`BundleAuctionOptions::one_bundle_per_bidder`] is set.
pub fn run_bundle_auction<R: Rng + ?Sized>(
    matrix: &BundleBidMatrix,
    options: &BundleAuctionOptions,
    rng: &mut R,
) -> Result<MultiObjectOutcome> {
    let num_bundles = matrix.validate()?;
    let num_bidders = matrix.bids.len();
    let mut winners = Vec::with_capacity(num_bundles);
    let mut payments = Vec::with_capacity(num_bundles);
    let mut payoffs = vec![0.0; num_bidders];
    let mut has_won = vec![false; num_bidders];
    for k in 0..num_bundles {
        let column: Vec<(usize, f64)> = (0..num_bidders)
            .filter(|&i| !(options.one_bundle_per_bidder && has_won[i]))
            .map(|i| (i, matrix.bids[i][k]))
            .collect();
        let (winner, payment) = settle_object(&column, rng);
        if let Some(w) = winner {
            payoffs[w] += matrix.values[w][k] - payment;
            has_won[w] = true;
        }
        winners.push(winner);
        payments.push(payment);
    }
    let revenue = payments.iter().sum();
    Ok(MultiObjectOutcome { winners, payments, revenue, payoffs })
}

/// Runs the naive format: one second-price auction per subcarrier. This is
/// the mixed-bundle auction with singleton bundles, sharing its settlement
/// path so the two are identical given the same random stream.
pub fn run_naive_auction<R: Rng + ?Sized>(
    per_subcarrier_bids: &[Vec<f64>],
    per_subcarrier_values: &[Vec<f64>],
    rng: &mut R,
) -> Result<MultiObjectOutcome> {
    let matrix = BundleBidMatrix {
        bids: per_subcarrier_bids.to_vec(),
        values: per_subcarrier_values.to_vec(),
    };
    run_bundle_auction(&matrix, &BundleAuctionOptions::default(), rng)
}

/// Mean revenue of each format on identical value draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormatRevenueComparison {
    /// Per-subcarrier auctions.
    pub naive: f64,
    /// Everything sold as a single object.
    pub pure_bundle: f64,
    /// Uniform bundles, one per bidder.
    pub mixed_bundle: f64,
    pub trials: u64,
}

/// Compares the revenue of the three formats with `n_a` truthful bidders on
/// the same per-subcarrier value draws.
pub fn compare_formats(
    model: &PrivateValueModel,
    k_tilde: usize,
    n_a: usize,
    trials: u64,
    seed: u64,
) -> Result<FormatRevenueComparison> {
    if n_a < 2 {
        return Err(Error::domain("format comparison needs at least two bidders"));
    }
    if trials < 1 {
        return Err(Error::domain("need at least one trial"));
    }
    let partition = partition_uniform(k_tilde, n_a)?;
    // Ranking clamped bids needs only the top two of each column.
    fn second_highest(values: impl Iterator<Item = f64>) -> f64 {
        let mut best = 0.0f64;
        let mut second = 0.0f64;
        for v in values {
            let b = v.max(0.0);
            if b > best {
                second = best;
                best = b;
            } else if b > second {
                second = b;
            }
        }
        if best > 0.0 {
            second
        } else {
            0.0
        }
    }
    let rows = collect_trials(seed, trials, |_, rng| {
        let values: Vec<Vec<f64>> =
            (0..n_a).map(|_| (0..k_tilde).map(|_| model.draw(rng)).collect()).collect();
        let naive: f64 =
            (0..k_tilde).map(|j| second_highest(values.iter().map(|row| row[j]))).sum();
        let pure = second_highest(values.iter().map(|row| row.iter().sum::<f64>()));
        let grouped = bundle_values(&values, &partition).expect("dimensions fixed above");
        let mixed: f64 = (0..partition.num_bundles())
            .map(|k| second_highest(grouped.iter().map(|row| row[k])))
            .sum();
        (naive, pure, mixed)
    });
    let n = rows.len() as f64;
    Ok(FormatRevenueComparison {
        naive: rows.iter().map(|r| r.0).sum::<f64>() / n,
        pure_bundle: rows.iter().map(|r| r.1).sum::<f64>() / n,
        mixed_bundle: rows.iter().map(|r| r.2).sum::<f64>() / n,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_stream;

    #[test]
    fn uniform_partition_sizes() {
        let p = partition_uniform(128, 4).unwrap();
        assert_eq!(p.cardinalities(), vec![32, 32, 32, 32]);
        let p = partition_uniform(128, 5).unwrap();
        assert_eq!(p.cardinalities(), vec![26, 26, 26, 25, 25]);
        let p = partition_uniform(5, 5).unwrap();
        assert_eq!(p.cardinalities(), vec![1, 1, 1, 1, 1]);
        assert!(partition_uniform(4, 5).is_err());
        assert!(partition_uniform(4, 0).is_err());
    }

    #[test]
    fn uniform_partition_is_contiguous_and_covers() {
        let p = partition_uniform(11, 3).unwrap();
        assert_eq!(p.bundles()[0], vec![0, 1, 2, 3]);
        assert_eq!(p.bundles()[1], vec![4, 5, 6, 7]);
        assert_eq!(p.bundles()[2], vec![8, 9, 10]);
        let mut all: Vec<usize> = p.bundles().iter().flatten().cloned().collect();
        all.sort_unstable();
        assert_eq!(all, (0..11).collect::<Vec<_>>());
    }

    #[test]
    fn shuffled_partition_is_a_permutation_with_same_sizes() {
        let mut rng = trial_stream(50, 0);
        let p = partition_shuffled(64, 4, &mut rng).unwrap();
        assert_eq!(p.cardinalities(), vec![16; 4]);
        let mut all: Vec<usize> = p.bundles().iter().flatten().cloned().collect();
        all.sort_unstable();
        assert_eq!(all, (0..64).collect::<Vec<_>>());
        let contiguous = partition_uniform(64, 4).unwrap();
        assert_ne!(p.bundles()[0], contiguous.bundles()[0]);
    }

    #[test]
    fn value_balanced_partition_evens_out_totals() {
        // Strongly skewed scores: contiguous grouping is badly unbalanced.
        let scores: Vec<f64> = (0..12).map(|j| (j as f64 + 1.0).powi(2)).collect();
        let p = partition_value_balanced(&scores, 3).unwrap();
        assert_eq!(p.cardinalities(), vec![4, 4, 4]);
        let totals: Vec<f64> = p
            .bundles()
            .iter()
            .map(|b| b.iter().map(|&j| scores[j]).sum::<f64>())
            .collect();
        let spread = totals.iter().cloned().fold(f64::MIN, f64::max)
            - totals.iter().cloned().fold(f64::MAX, f64::min);
        let contiguous = partition_uniform(12, 3).unwrap();
        let c_totals: Vec<f64> = contiguous
            .bundles()
            .iter()
            .map(|b| b.iter().map(|&j| scores[j]).sum::<f64>())
            .collect();
        let c_spread = c_totals.iter().cloned().fold(f64::MIN, f64::max)
            - c_totals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < c_spread / 4.0, "balanced spread {spread} vs contiguous {c_spread}");
    }

    #[test]
    fn bundle_values_singletons_and_zeros() {
        let values = vec![vec![1.0, -2.0, 3.0], vec![0.5, 0.0, -1.0]];
        let singles = partition_uniform(3, 3).unwrap();
        assert_eq!(bundle_values(&values, &singles).unwrap(), values);
        let zeros = vec![vec![0.0; 4]; 2];
        let halves = partition_uniform(4, 2).unwrap();
        assert_eq!(bundle_values(&zeros, &halves).unwrap(), vec![vec![0.0; 2]; 2]);
    }

    #[test]
    fn bundle_values_are_row_sums_over_bundles() {
        let mut rng = trial_stream(51, 0);
        let values: Vec<Vec<f64>> =
            (0..3).map(|_| (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let p = partition_uniform(6, 2).unwrap();
        let y = bundle_values(&values, &p).unwrap();
        for i in 0..3 {
            let left: f64 = values[i][..3].iter().sum();
            let right: f64 = values[i][3..].iter().sum();
            assert!((y[i][0] - left).abs() < 1e-12);
            assert!((y[i][1] - right).abs() < 1e-12);
        }
        let short = vec![vec![1.0; 5]];
        assert!(bundle_values(&short, &p).is_err());
    }

    #[test]
    fn lone_bidder_wins_everything_for_free() {
        let mut rng = trial_stream(52, 0);
        let matrix = BundleBidMatrix::from_values(vec![vec![2.0, 3.0, 1.0]]);
        let out = run_bundle_auction(&matrix, &BundleAuctionOptions::default(), &mut rng).unwrap();
        assert_eq!(out.winners, vec![Some(0), Some(0), Some(0)]);
        assert_eq!(out.payments, vec![0.0; 3]);
        assert_eq!(out.revenue, 0.0);
        assert_eq!(out.payoffs, vec![6.0]);
    }

    #[test]
    fn distinct_leaders_take_distinct_bundles() {
        let mut rng = trial_stream(53, 0);
        let matrix = BundleBidMatrix::from_values(vec![
            vec![5.0, 1.0, 0.5],
            vec![1.0, 4.0, 0.25],
            vec![0.5, 2.0, 3.0],
        ]);
        let out = run_bundle_auction(&matrix, &BundleAuctionOptions::default(), &mut rng).unwrap();
        assert_eq!(out.winners, vec![Some(0), Some(1), Some(2)]);
        assert_eq!(out.payments, vec![1.0, 2.0, 0.5]);
        assert!((out.revenue - 3.5).abs() < 1e-12);
    }

    #[test]
    fn per_bundle_awards_go_to_the_argmax_bidder() {
        let mut rng = trial_stream(54, 0);
        for _ in 0..1000 {
            let values: Vec<Vec<f64>> =
                (0..4).map(|_| (0..3).map(|_| rng.gen_range(-1.0..3.0)).collect()).collect();
            let matrix = BundleBidMatrix::from_values(values.clone());
            let out =
                run_bundle_auction(&matrix, &BundleAuctionOptions::default(), &mut rng).unwrap();
            for (k, winner) in out.winners.iter().enumerate() {
                let best = (0..4).map(|i| values[i][k]).fold(f64::NEG_INFINITY, f64::max);
                if best > 0.0 {
                    let argmax = (0..4).find(|&i| values[i][k] == best).unwrap();
                    assert_eq!(*winner, Some(argmax));
                } else {
                    assert_eq!(*winner, None);
                }
            }
        }
    }

    #[test]
    fn raising_a_bid_never_loses_a_won_bundle() {
        let mut rng = trial_stream(55, 0);
        for _ in 0..500 {
            let values: Vec<Vec<f64>> =
                (0..3).map(|_| (0..4).map(|_| rng.gen_range(0.0..3.0)).collect()).collect();
            let matrix = BundleBidMatrix::from_values(values);
            let before =
                run_bundle_auction(&matrix, &BundleAuctionOptions::default(), &mut rng).unwrap();
            let bidder = rng.gen_range(0..3);
            let bundle = rng.gen_range(0..4);
            let mut raised = matrix.clone();
            raised.bids[bidder][bundle] += rng.gen_range(0.1..2.0);
            let after =
                run_bundle_auction(&raised, &BundleAuctionOptions::default(), &mut rng).unwrap();
            for k in 0..4 {
                if before.winners[k] == Some(bidder) && k != bundle {
                    assert_eq!(after.winners[k], Some(bidder));
                }
            }
            if before.winners[bundle] == Some(bidder) {
                assert_eq!(after.winners[bundle], Some(bidder));
            }
        }
    }

    #[test]
    fn one_bundle_per_bidder_passes_later_bundles_to_runners_up() {
        let mut rng = trial_stream(56, 0);
        let matrix = BundleBidMatrix::from_values(vec![vec![5.0, 4.0], vec![3.0, 2.0]]);
        let constrained = BundleAuctionOptions { one_bundle_per_bidder: true };
        let out = run_bundle_auction(&matrix, &constrained, &mut rng).unwrap();
        assert_eq!(out.winners, vec![Some(0), Some(1)]);
        // Bidder 0 is excluded from bundle 1's price as well.
        assert_eq!(out.payments, vec![3.0, 0.0]);
        let free = run_bundle_auction(&matrix, &BundleAuctionOptions::default(), &mut rng).unwrap();
        assert_eq!(free.winners, vec![Some(0), Some(0)]);
        assert_eq!(free.payments, vec![3.0, 2.0]);
    }

    #[test]
    fn naive_format_mechanics() {
        let mut rng = trial_stream(57, 0);
        let solo_bids = vec![vec![1.0, 2.0, 0.5]];
        let out = run_naive_auction(&solo_bids, &solo_bids, &mut rng).unwrap();
        assert_eq!(out.winners, vec![Some(0); 3]);
        assert_eq!(out.revenue, 0.0);

        // Strictly interleaved bids: each bidder wins where it leads.
        let bids = vec![vec![4.0, 1.0, 6.0, 1.0], vec![2.0, 3.0, 2.0, 5.0]];
        let out = run_naive_auction(&bids, &bids, &mut rng).unwrap();
        assert_eq!(out.winners, vec![Some(0), Some(1), Some(0), Some(1)]);
        assert_eq!(out.payments, vec![2.0, 1.0, 2.0, 1.0]);
        let direct: f64 = (0..4).map(|j| bids[0][j].min(bids[1][j])).sum();
        assert!((out.revenue - direct).abs() < 1e-12);
    }

    #[test]
    fn singleton_mixed_bundles_equal_naive_outcomes_exactly() {
        let values: Vec<Vec<f64>> = {
            let mut rng = trial_stream(58, 0);
            (0..3).map(|_| (0..5).map(|_| rng.gen_range(-1.0..2.0)).collect()).collect()
        };
        let p = partition_uniform(5, 5).unwrap();
        let grouped = bundle_values(&values, &p).unwrap();
        let matrix = BundleBidMatrix::from_values(grouped);
        let a = run_bundle_auction(&matrix, &BundleAuctionOptions::default(), &mut trial_stream(59, 1))
            .unwrap();
        let clamped: Vec<Vec<f64>> =
            values.iter().map(|r| r.iter().map(|v| v.max(0.0)).collect()).collect();
        let b = run_naive_auction(&clamped, &values, &mut trial_stream(59, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn format_comparison_direction_flips_with_bidder_count() {
        let model = PrivateValueModel::new(100.0, 1.0, 1.0).unwrap();
        let few = compare_formats(&model, 10, 2, 20_000, 60).unwrap();
        assert!(
            few.pure_bundle > few.naive,
            "bundling should win with 2 bidders: {} vs {}",
            few.pure_bundle,
            few.naive
        );
        let many = compare_formats(&model, 10, 10, 20_000, 61).unwrap();
        assert!(
            many.pure_bundle < many.naive,
            "bundling should lose with 10 bidders: {} vs {}",
            many.pure_bundle,
            many.naive
        );
        // Singleton mixed bundles are the naive format.
        assert!((many.mixed_bundle - many.naive).abs() < 1e-12);
    }
}
