//! Closed forms and quadrature for win probabilities, expected revenue, and
//! outage of the cooperative auction.
//!
//! Everything here is deterministic; the Monte Carlo counterparts live in
//! [`crate::auction`], [`crate::bundle`], and [`crate::netsim`]. Two
//! different bidder-count weightings appear on purpose: the single-object
//! closed forms weight the event of n active bidders by A^n (the joint
//! probability that n given users hold positive values, not normalized over
//! n), while the bundle revenue weights it uniformly by 1/N. Each formula is
//! evaluated exactly as stated; measured gaps against simulation are reported
//! by the validation command rather than patched here.

use crate::channel::{gaussian_capacity_approx, OfdmLinkState};
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::special::{binomial, erf, reg_lower_gamma_int};
use crate::valuation::BundleValueModel;

/// Parameters of a symmetric group of weak users: every user shares the same
/// mean link SNRs and rate-shortfall ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricGroupParams {
    /// Mean helper-link SNR (linear).
    pub gamma_bar_ph: f64,
    /// Mean direct-link SNR (linear).
    pub gamma_bar_bs: f64,
    /// Rate-shortfall ratio entering the private value.
    pub alpha: f64,
    /// Number of weak users in the group.
    pub n_weak: usize,
    a: f64,
}

impl SymmetricGroupParams {
    pub fn new(gamma_bar_ph: f64, gamma_bar_bs: f64, alpha: f64, n_weak: usize) -> Result<Self> {
        if !(gamma_bar_ph > 0.0 && gamma_bar_ph.is_finite())
            || !(gamma_bar_bs > 0.0 && gamma_bar_bs.is_finite())
        {
            return Err(Error::domain(format!(
                "mean SNRs must be positive and finite, got {gamma_bar_ph} and {gamma_bar_bs}"
            )));
        }
        if !(alpha > 0.0) {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        if n_weak < 1 {
            return Err(Error::domain("group needs at least one weak user"));
        }
        let a = gamma_bar_ph / (gamma_bar_ph + gamma_bar_bs);
        Ok(SymmetricGroupParams { gamma_bar_ph, gamma_bar_bs, alpha, n_weak, a })
    }

    /// Probability A that a single user's private value is positive.
    pub fn bid_prob(&self) -> f64 {
        self.a
    }

    /// Normalizer of the value density: sum of the two mean SNRs.
    pub fn lambda(&self) -> f64 {
        self.gamma_bar_ph + self.gamma_bar_bs
    }
}

/// Probability weight that exactly `n` of the users hold positive private
/// values: A^n. The weights are not normalized over n; they enter the closed
/// forms below exactly in this shape.
pub fn prob_na(n: usize, params: &SymmetricGroupParams) -> Result<f64> {
    if n < 1 || n > params.n_weak {
        return Err(Error::domain(format!(
            "active bidder count {n} outside 1..={}",
            params.n_weak
        )));
    }
    Ok(params.a.powi(n as i32))
}

/// Probability that a given user wins the single-object auction:
/// sum over n of (1/n) A^(2n).
pub fn win_prob_single(params: &SymmetricGroupParams) -> f64 {
    (1..=params.n_weak).map(|n| params.a.powi(2 * n as i32) / n as f64).sum()
}

/// Expected helper revenue of the single-object auction in closed form.
///
/// Term n combines the A^(2n) weight with the expected second-highest
/// positive value among n bidders:
/// (-1)^n A^(2n) gamma_bar_ph^n / lambda^(n-1) * sum_k C(n-2,k)/(n-k-1)^2.
/// The lone-bidder term is zero (a sole bidder pays nothing under second
/// price). The alternating series is a one-sided approximation; the Monte
/// Carlo revenue in [`crate::auction::simulate_revenue`] is the measurement
/// it is compared against.
pub fn revenue_single_closed_form(params: &SymmetricGroupParams) -> Result<f64> {
    let a = params.a;
    let mut total = 0.0;
    for n in 2..=params.n_weak {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let mut inner = 0.0;
        for k in 0..=(n - 2) {
            let d = (n - k - 1) as f64;
            inner += binomial((n - 2) as u64, k as u64) / (d * d);
        }
        // gamma^n / lambda^(n-1) = gamma * A^(n-1), grouped to avoid
        // overflowing the separate powers.
        let term = sign * params.gamma_bar_ph * a.powi(3 * n as i32 - 1) * inner;
        if !term.is_finite() {
            return Err(Error::numeric(format!("revenue term at n={n} is not finite")));
        }
        total += term;
    }
    Ok(total)
}

/// Lower bound on the single-partner outage probability at target rate `d`:
/// the no-cooperation outage weighted by the losing probability plus the
/// half-rate helper-link outage weighted by the winning probability.
pub fn outage_single_bound(d: f64, params: &SymmetricGroupParams) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::domain(format!("target rate must be >= 0, got {d}")));
    }
    let psi = win_prob_single(params);
    let lose_term = crate::channel::outage_prob_direct(d, params.gamma_bar_bs)?;
    let win_term = crate::channel::outage_prob_direct(d / 2.0, params.gamma_bar_ph)?;
    Ok(lose_term * (1.0 - psi) + win_term * psi)
}

// Quadrature window for Erlang expectations: the density beyond
// mean + 10 standard deviations is folded back in by the tail terms below.
fn erlang_upper(model: &BundleValueModel) -> f64 {
    let c = model.cardinality as f64;
    model.gamma_bar_ph * (c + 10.0 * c.sqrt())
}

// E[G^p(Y)] for Y ~ the bundle law with cdf G. The tail adds
// integral_u^inf G^p g ~ 1 - G(u), exact to O((1-G(u))^2).
fn expect_g_pow(model: &BundleValueModel, p: u32) -> Result<f64> {
    if p == 0 {
        return Ok(1.0);
    }
    let u = erlang_upper(model);
    let body = integrate(&|y| model.cdf(y).powi(p as i32) * model.pdf(y), 0.0, u, 1e-12)?;
    Ok(body + (1.0 - model.cdf(u)))
}

// E[Y G^p(Y)]. The tail integral of y g(y) over (u, inf) has the closed form
// c * gamma * (1 - P(c+1, u/gamma)) because y g_c(y) = c gamma g_{c+1}(y).
fn expect_y_g_pow(model: &BundleValueModel, p: u32) -> Result<f64> {
    let u = erlang_upper(model);
    let tol = 1e-11 * model.mean().max(1.0);
    let body = integrate(&|y| y * model.cdf(y).powi(p as i32) * model.pdf(y), 0.0, u, tol)?;
    let tail = model.mean()
        * (1.0 - reg_lower_gamma_int(model.cardinality + 1, u / model.gamma_bar_ph)?);
    Ok(body + tail)
}

/// Expected revenue of the mixed-bundle auction: for each bundle, sum over
/// bidder counts n of (1/N) E[G^(n-1)(Y1)] E[Y2 G^(n-2)(Y2)], evaluated by
/// adaptive quadrature against the bundle density.
pub fn revenue_bundle(bundle_models: &[BundleValueModel], n_weak: usize) -> Result<f64> {
    if bundle_models.is_empty() {
        return Err(Error::domain("need at least one bundle"));
    }
    if n_weak < 1 {
        return Err(Error::domain("group needs at least one weak user"));
    }
    let mut total = 0.0;
    for model in bundle_models {
        for n in 2..=n_weak {
            total += expect_g_pow(model, (n - 1) as u32)?
                * expect_y_g_pow(model, (n - 2) as u32)?
                / n_weak as f64;
        }
    }
    Ok(total)
}

/// Probability that a given user wins one bundle:
/// (1/N) sum over n of E[G^(n-1)(Y)].
pub fn theta_win(bundle_model: &BundleValueModel, n_weak: usize) -> Result<f64> {
    if n_weak < 1 {
        return Err(Error::domain("group needs at least one weak user"));
    }
    let mut sum = 0.0;
    for n in 1..=n_weak {
        sum += expect_g_pow(bundle_model, (n - 1) as u32)?;
    }
    Ok(sum / n_weak as f64)
}

/// Normal-approximation outage probability of the bundled auction at target
/// rate `d`.
///
/// The direct sum capacity over `k_tilde` subcarriers, and the boosted sum
/// over `k_tilde + c1` when the user wins a bundle of c1 subcarriers, are
/// both approximated as Gaussians; the two outage terms are mixed by the
/// bundle winning probability. `ofdm_samples` supply the empirical variance
/// of the correlated subcarrier capacities.
pub fn outage_bundle_approx(
    d: f64,
    bundle_model: &BundleValueModel,
    n_weak: usize,
    k_tilde: usize,
    gamma0: f64,
    ofdm_samples: &[OfdmLinkState],
) -> Result<f64> {
    let theta = theta_win(bundle_model, n_weak)?;
    let c1 = bundle_model.cardinality as usize;
    let base = gaussian_capacity_approx(k_tilde, gamma0, Some(ofdm_samples))?;
    let boosted = gaussian_capacity_approx(k_tilde + c1, gamma0, Some(ofdm_samples))?;
    let phi = |mean: f64, variance: Option<f64>| -> Result<f64> {
        let var = variance.expect("samples were supplied");
        if !(var > 0.0) {
            return Err(Error::numeric(format!("degenerate capacity variance {var}")));
        }
        Ok(0.5 * (1.0 + erf((d - mean) / (2.0 * var).sqrt())))
    };
    Ok(phi(base.mean, base.variance)? * (1.0 - theta)
        + phi(boosted.mean, boosted.variance)? * theta)
}

// Expected second-highest of n i.i.d. draws from the bundle law:
// integral of y n(n-1) G^(n-2) (1-G) g over the quadrature window. The
// integrand is bounded by n^2 y g(y), so the truncated tail is negligible at
// mean + 10 sigma.
fn second_highest_mean(model: &BundleValueModel, n: usize) -> Result<f64> {
    // Wider window than the plain expectations: the n^2 order-statistic
    // prefactor amplifies the truncated tail.
    let c = model.cardinality as f64;
    let u = model.gamma_bar_ph * (c + 15.0 * c.sqrt());
    let nn = n as f64;
    let tol = 1e-11 * model.mean().max(1.0) * nn;
    integrate(
        &|y| {
            let g = model.cdf(y);
            y * nn * (nn - 1.0) * g.powi(n as i32 - 2) * (1.0 - g) * model.pdf(y)
        },
        0.0,
        u,
        tol,
    )
}

/// The two expected proceeds compared when deciding whether to bundle, for
/// `n` bidders: (second-highest sum of values with one Erlang bundle per
/// bidder, n times the expected second-highest single-object value). The
/// first is quadrature over the order-statistic density; the second is
/// n * gamma * (H_n - 1) for exponential objects.
pub fn bundle_superiority_sides(
    bundle_model: &BundleValueModel,
    n: usize,
) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::domain(format!(
            "a second-highest value needs at least 2 bidders, got {n}"
        )));
    }
    let bundle_side = second_highest_mean(bundle_model, n)?;
    let separate_side =
        n as f64 * bundle_model.gamma_bar_ph * (crate::special::harmonic(n as u64) - 1.0);
    Ok((bundle_side, separate_side))
}

/// Largest bidder count for which selling everything as one bundle beats
/// selling the objects separately, per [`bundle_superiority_sides`].
pub fn bundle_superiority_threshold(
    bundle_model: &BundleValueModel,
    n_range: std::ops::RangeInclusive<usize>,
) -> Result<usize> {
    let (lo, hi) = (*n_range.start(), *n_range.end());
    if lo > 2 || hi < 10 {
        return Err(Error::domain("bidder range must cover at least 2..=10"));
    }
    let mut best = None;
    for n in lo.max(2)..=hi {
        let (bundle_side, separate_side) = bundle_superiority_sides(bundle_model, n)?;
        if bundle_side > separate_side {
            best = Some(n);
        }
    }
    best.ok_or_else(|| Error::domain("bundling never dominates on the given range"))
}

/// Number of additional game stages a helper can fund from one stage's
/// revenue: closed-form expected revenue divided by the expected payment per
/// stage when bidding.
pub fn helper_advantage_eta(
    params: &SymmetricGroupParams,
    expected_payment_per_stage: f64,
) -> Result<f64> {
    if !(expected_payment_per_stage > 0.0) {
        return Err(Error::domain(format!(
            "expected payment must be positive, got {expected_payment_per_stage}"
        )));
    }
    Ok(revenue_single_closed_form(params)? / expected_payment_per_stage)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::OfdmModel;
    use crate::rng::trial_stream;
    use crate::special::harmonic;

    fn sym(n: usize) -> SymmetricGroupParams {
        SymmetricGroupParams::new(1.0, 1.0, 1.0, n).unwrap()
    }

    #[test]
    fn bid_prob_and_active_bidder_weights() {
        assert_eq!(sym(5).bid_prob(), 0.5);
        assert_eq!(prob_na(3, &sym(5)).unwrap(), 0.125);
        let skew = SymmetricGroupParams::new(10.0, 1.0, 1.0, 5).unwrap();
        assert!((prob_na(1, &skew).unwrap() - 10.0 / 11.0).abs() < 1e-15);
        assert!(prob_na(0, &sym(5)).is_err());
        assert!(prob_na(6, &sym(5)).is_err());
    }

    #[test]
    fn params_reject_bad_inputs() {
        assert!(SymmetricGroupParams::new(0.0, 1.0, 1.0, 5).is_err());
        assert!(SymmetricGroupParams::new(1.0, -1.0, 1.0, 5).is_err());
        assert!(SymmetricGroupParams::new(1.0, 1.0, 0.0, 5).is_err());
        assert!(SymmetricGroupParams::new(1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn win_probability_known_values() {
        assert_eq!(win_prob_single(&sym(1)), 0.25);
        // Five-term sum at A = 1/2: 1/4 + 1/32 + 1/192 + 1/1024 + 1/5120.
        assert!((win_prob_single(&sym(5)) - 0.2876302083333333).abs() < 1e-12);
        let near_certain = SymmetricGroupParams::new(1.0, 1e-12, 1.0, 1).unwrap();
        assert!((win_prob_single(&near_certain) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn win_probability_stays_in_unit_interval_on_moderate_grids() {
        for i in 1..=15 {
            let a = i as f64 * 0.05;
            let gamma_bs = 1.0 / a - 1.0;
            for n in 1..=10 {
                let p = SymmetricGroupParams::new(1.0, gamma_bs, 1.0, n).unwrap();
                assert!((p.bid_prob() - a).abs() < 1e-12);
                let psi = win_prob_single(&p);
                assert!(psi > 0.0 && psi < 1.0, "psi {psi} at A={a} N={n}");
            }
        }
    }

    #[test]
    fn closed_form_revenue_small_groups() {
        assert_eq!(revenue_single_closed_form(&sym(1)).unwrap(), 0.0);
        // Hand-evaluated terms at A=1/2, gamma=1: n=2 gives 2^-5, n=3
        // subtracts (5/4)2^-8, n=4 adds (29/18)2^-11, n=5 subtracts
        // (103/48)2^-14; the running sums below are those fractions.
        assert!((revenue_single_closed_form(&sym(2)).unwrap() - 1.0 / 32.0).abs() < 1e-15);
        assert!((revenue_single_closed_form(&sym(3)).unwrap() - 27.0 / 1024.0).abs() < 1e-15);
        assert!(
            (revenue_single_closed_form(&sym(5)).unwrap() - 63755.0 / 2359296.0).abs() < 1e-15
        );
    }

    #[test]
    fn closed_form_revenue_scales_with_helper_snr() {
        // Every term carries one power of gamma_ph at fixed A.
        let base = revenue_single_closed_form(&sym(4)).unwrap();
        let scaled =
            revenue_single_closed_form(&SymmetricGroupParams::new(3.0, 3.0, 1.0, 4).unwrap())
                .unwrap();
        assert!((scaled - 3.0 * base).abs() < 1e-12);
    }

    #[test]
    fn outage_bound_known_values_and_limits() {
        assert_eq!(outage_single_bound(0.0, &sym(5)).unwrap(), 0.0);
        let v = outage_single_bound(1.0, &sym(5)).unwrap();
        assert!((v - 0.547843).abs() < 1e-4, "bound {v}");
        assert!(outage_single_bound(-1.0, &sym(5)).is_err());

        // Vanishing helper link: reduces to the direct-link outage.
        let weak_helper = SymmetricGroupParams::new(1e-9, 1.0, 1.0, 5).unwrap();
        let direct = crate::channel::outage_prob_direct(2.0, 1.0).unwrap();
        assert!((outage_single_bound(2.0, &weak_helper).unwrap() - direct).abs() < 1e-8);
    }

    #[test]
    fn outage_bound_in_unit_interval_on_moderate_grids() {
        for i in 1..=15 {
            let a = i as f64 * 0.05;
            let p = SymmetricGroupParams::new(1.0, 1.0 / a - 1.0, 1.0, 8).unwrap();
            for j in 0..=20 {
                let d = j as f64 * 0.5;
                let v = outage_single_bound(d, &p).unwrap();
                assert!((0.0..=1.0).contains(&v), "bound {v} at A={a} D={d}");
            }
        }
    }

    #[test]
    fn bundle_revenue_exponential_case() {
        // c=1, gamma=1, N=2: the only term is (1/2) E[G(Y1)] E[Y2] =
        // (1/2)(1/2)(1) = 1/4 per bundle.
        let m = BundleValueModel::new(1.0, 1).unwrap();
        let one = revenue_bundle(&[m], 2).unwrap();
        assert!((one - 0.25).abs() < 1e-8, "per-bundle revenue {one}");
        let three = revenue_bundle(&[m, m, m], 2).unwrap();
        assert!((three - 0.75).abs() < 1e-7);
        assert_eq!(revenue_bundle(&[m], 1).unwrap(), 0.0);
        assert!(revenue_bundle(&[], 2).is_err());
    }

    #[test]
    fn bundle_revenue_matches_direct_expectation_structure() {
        // Rebuild the N=3 sum by hand from the two expectation helpers.
        let m = BundleValueModel::new(2.0, 3).unwrap();
        let by_hand = (expect_g_pow(&m, 1).unwrap() * expect_y_g_pow(&m, 0).unwrap()
            + expect_g_pow(&m, 2).unwrap() * expect_y_g_pow(&m, 1).unwrap())
            / 3.0;
        let api = revenue_bundle(&[m], 3).unwrap();
        assert!((api - by_hand).abs() < 1e-12);
    }

    #[test]
    fn win_expectations_match_probability_integral_transform() {
        // E[G^p(Y)] = 1/(p+1) for any continuous law, so theta reduces to
        // H_N / N regardless of the bundle shape.
        for (gamma, c) in [(1.0, 1u64), (10.0, 10), (0.5, 4)] {
            let m = BundleValueModel::new(gamma, c).unwrap();
            for p in 1..=6u32 {
                let e = expect_g_pow(&m, p).unwrap();
                let want = 1.0 / (p as f64 + 1.0);
                assert!((e - want).abs() < 1e-7, "E[G^{p}] = {e} for c={c}");
            }
            let theta = theta_win(&m, 7).unwrap();
            assert!((theta - harmonic(7) / 7.0).abs() < 1e-7);
        }
        assert_eq!(theta_win(&BundleValueModel::new(1.0, 1).unwrap(), 1).unwrap(), 1.0);
        let two = theta_win(&BundleValueModel::new(1.0, 1).unwrap(), 2).unwrap();
        assert!((two - 0.75).abs() < 1e-8);
    }

    #[test]
    fn theta_decreases_with_group_size() {
        let m = BundleValueModel::new(2.0, 5).unwrap();
        let mut prev = f64::INFINITY;
        for n in 1..=12 {
            let theta = theta_win(&m, n).unwrap();
            assert!(theta < prev, "theta not decreasing at N={n}");
            prev = theta;
        }
    }

    #[test]
    fn helper_advantage_ratio_identities() {
        // A lone weak user never generates revenue, so helping finances
        // nothing; revenue equal to the payment finances exactly one stage.
        let lone = SymmetricGroupParams::new(1.0, 1.0, 1.0, 1).unwrap();
        assert_eq!(helper_advantage_eta(&lone, 3.0).unwrap(), 0.0);
        let params = sym(5);
        let revenue = revenue_single_closed_form(&params).unwrap();
        assert_eq!(helper_advantage_eta(&params, revenue).unwrap(), 1.0);
        assert!(helper_advantage_eta(&params, 0.0).is_err());
    }

    #[test]
    fn weighted_value_expectation_exponential_closed_form() {
        // For c=1, gamma=1: E[Y G^p(Y)] = sum_k C(p,k)(-1)^k/(k+1)^2 by the
        // binomial expansion of (1-e^-y)^p.
        let m = BundleValueModel::new(1.0, 1).unwrap();
        for p in 0..=5u32 {
            let want: f64 = (0..=p)
                .map(|k| {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binomial(p as u64, k as u64) / ((k + 1) as f64 * (k + 1) as f64)
                })
                .sum();
            let got = expect_y_g_pow(&m, p).unwrap();
            assert!((got - want).abs() < 1e-8, "E[Y G^{p}] = {got}, want {want}");
        }
    }

    #[test]
    fn bundle_outage_approximation_limits_and_monotonicity() {
        let ofdm = OfdmModel::new(1.0, 32, 4).unwrap();
        let mut rng = trial_stream(70, 0);
        let samples: Vec<_> = (0..4000).map(|_| ofdm.draw(&mut rng)).collect();
        let m = BundleValueModel::new(1.0, 8).unwrap();
        let low = outage_bundle_approx(0.5, &m, 10, 32, 1.0, &samples).unwrap();
        assert!(low < 0.01, "low-rate outage {low}");
        let high = outage_bundle_approx(80.0, &m, 10, 32, 1.0, &samples).unwrap();
        assert!(high > 0.99, "high-rate outage {high}");
        let mut prev = -1.0;
        for j in 0..=40 {
            let d = j as f64 * 2.0;
            let v = outage_bundle_approx(d, &m, 10, 32, 1.0, &samples).unwrap();
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev, "not monotone at D={d}");
            prev = v;
        }
    }

    #[test]
    fn superiority_threshold_for_wide_bundles() {
        let m = BundleValueModel::new(10.0, 10).unwrap();
        assert_eq!(bundle_superiority_threshold(&m, 2..=10).unwrap(), 7);
        // Dominance at two bidders specifically.
        let lhs = second_highest_mean(&m, 2).unwrap();
        let rhs = 2.0 * 10.0 * (harmonic(2) - 1.0);
        assert!(lhs > rhs, "no dominance at n=2: {lhs} vs {rhs}");
        assert!(bundle_superiority_threshold(&m, 2..=5).is_err());
    }

    #[test]
    fn second_highest_mean_exponential_closed_form() {
        // For n i.i.d. exponentials the second-highest mean is
        // gamma (H_n - 1).
        let m = BundleValueModel::new(3.0, 1).unwrap();
        for n in 2..=6 {
            let got = second_highest_mean(&m, n).unwrap();
            let want = 3.0 * (harmonic(n as u64) - 1.0);
            assert!((got - want).abs() < 1e-7, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn eta_ratio_semantics() {
        assert_eq!(helper_advantage_eta(&sym(1), 5.0).unwrap(), 0.0);
        let rev = revenue_single_closed_form(&sym(5)).unwrap();
        assert!((helper_advantage_eta(&sym(5), rev).unwrap() - 1.0).abs() < 1e-12);
        assert!(helper_advantage_eta(&sym(5), 0.0).is_err());
    }
}
