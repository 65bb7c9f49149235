//! Monte Carlo oracles for the closed-form and quadrature results: the
//! probability transform behind the win weights, the factored bundle revenue
//! sum, and the two sides of the bundling comparison as raw order statistics.

use acops_core::analytic::{
    bundle_superiority_sides, bundle_superiority_threshold, revenue_bundle, theta_win,
};
use acops_core::rng::trial_stream;
use acops_core::stats::mean_and_stderr;
use acops_core::valuation::BundleValueModel;

#[test]
fn win_weights_follow_the_probability_transform() {
    // E[G^p(Y)] = 1/(p+1) when G is Y's own cdf, whatever the bundle shape.
    for (gamma, c) in [(1.0, 1), (2.5, 4)] {
        let model = BundleValueModel::new(gamma, c).unwrap();
        let mut rng = trial_stream(7, 0);
        let draws: Vec<f64> = (0..400_000).map(|_| model.draw(&mut rng)).collect();
        let mut se_sum = 0.0;
        let mut empirical_theta = 0.0;
        let n_weak = 6usize;
        for n in 1..=n_weak {
            let p = (n - 1) as i32;
            let vals: Vec<f64> = draws.iter().map(|y| model.cdf(*y).powi(p)).collect();
            let (mean, se) = mean_and_stderr(&vals);
            let want = 1.0 / n as f64;
            // p = 0 is exact (G^0 is identically 1), hence the closed bound.
            assert!(
                (mean - want).abs() <= 3.0 * se,
                "gamma={gamma} c={c} p={p}: {mean} vs {want} (se {se})"
            );
            empirical_theta += mean / n_weak as f64;
            se_sum += se / n_weak as f64;
        }
        let theta = theta_win(&model, n_weak).unwrap();
        assert!(
            (theta - empirical_theta).abs() < 3.0 * se_sum,
            "theta {theta} vs empirical {empirical_theta}"
        );
    }
}

#[test]
fn bundle_revenue_matches_factored_draws() {
    let bundles =
        vec![BundleValueModel::new(1.5, 3).unwrap(), BundleValueModel::new(1.5, 2).unwrap()];
    let n_weak = 4usize;
    let want = revenue_bundle(&bundles, n_weak).unwrap();

    // Per batch, each expectation factor gets its own independent sample, so
    // the product of batch means is unbiased for the product of expectations.
    let mut rng = trial_stream(8, 0);
    let batch_size = 25_000;
    let mut batch_sums = Vec::new();
    for _ in 0..40 {
        let mut total = 0.0;
        for model in &bundles {
            let first: Vec<f64> = (0..batch_size).map(|_| model.draw(&mut rng)).collect();
            let second: Vec<f64> = (0..batch_size).map(|_| model.draw(&mut rng)).collect();
            for n in 2..=n_weak {
                let g_pow = first.iter().map(|y| model.cdf(*y).powi(n as i32 - 1)).sum::<f64>()
                    / batch_size as f64;
                let y_g_pow = second
                    .iter()
                    .map(|y| y * model.cdf(*y).powi(n as i32 - 2))
                    .sum::<f64>()
                    / batch_size as f64;
                total += g_pow * y_g_pow / n_weak as f64;
            }
        }
        batch_sums.push(total);
    }
    let (mc, se) = mean_and_stderr(&batch_sums);
    assert!((want - mc).abs() < 3.0 * se, "formula {want} vs factored draws {mc} (se {se})");
}

#[test]
fn superiority_sides_match_order_statistic_draws() {
    let model = BundleValueModel::new(10.0, 10).unwrap();
    let single = BundleValueModel::new(10.0, 1).unwrap();
    let reps = 150_000usize;
    for n in [2usize, 6, 7, 8, 10] {
        let (bundle_side, separate_side) = bundle_superiority_sides(&model, n).unwrap();

        let mut rng = trial_stream(9, n as u64);
        let mut bundle_draws = Vec::with_capacity(reps);
        let mut single_draws = Vec::with_capacity(reps);
        for _ in 0..reps {
            let (mut best, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for _ in 0..n {
                let y = model.draw(&mut rng);
                if y > best {
                    second = best;
                    best = y;
                } else if y > second {
                    second = y;
                }
            }
            bundle_draws.push(second);

            let (mut best, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for _ in 0..n {
                let y = single.draw(&mut rng);
                if y > best {
                    second = best;
                    best = y;
                } else if y > second {
                    second = y;
                }
            }
            single_draws.push(n as f64 * second);
        }
        let (bundle_mc, bundle_se) = mean_and_stderr(&bundle_draws);
        let (single_mc, single_se) = mean_and_stderr(&single_draws);
        assert!(
            (bundle_side - bundle_mc).abs() < 3.0 * bundle_se,
            "n={n}: bundle side {bundle_side} vs draws {bundle_mc} (se {bundle_se})"
        );
        assert!(
            (separate_side - single_mc).abs() < 3.0 * single_se,
            "n={n}: separate side {separate_side} vs draws {single_mc} (se {single_se})"
        );

        // The crossover sits between 7 and 8 bidders for this model, in the
        // quadrature and in the raw draws alike.
        assert_eq!(bundle_side > separate_side, n <= 7, "quadrature crossover at n={n}");
        assert_eq!(bundle_mc > single_mc, n <= 7, "sampled crossover at n={n}");
    }
    assert_eq!(bundle_superiority_threshold(&model, 2..=10).unwrap(), 7);
}
