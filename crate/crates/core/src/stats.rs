//! Small sample-statistics helpers shared by the experiments.

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Normal-approximation confidence interval for a binomial proportion at
/// `z` standard deviations (z = 1.96 for 95%).
pub fn binomial_ci(successes: u64, n: u64, z: f64) -> (f64, f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let p = successes as f64 / n as f64;
    let half = z * (p * (1.0 - p) / n as f64).sqrt();
    (p, (p - half).max(0.0), (p + half).min(1.0))
}

/// One-sigma binomial standard deviation of an empirical proportion.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr_of_known_sample() {
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        // var = 5/3, se = sqrt(5/12)
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_samples() {
        assert!(mean_and_stderr(&[]).0.is_nan());
        let (m, se) = mean_and_stderr(&[7.0]);
        assert_eq!(m, 7.0);
        assert!(se.is_nan());
    }

    #[test]
    fn binomial_ci_is_clamped_to_unit_interval() {
        let (p, lo, hi) = binomial_ci(0, 100, 1.96);
        assert_eq!(p, 0.0);
        assert_eq!(lo, 0.0);
        assert!(hi >= 0.0);
        let (p, lo, hi) = binomial_ci(100, 100, 1.96);
        assert_eq!(p, 1.0);
        assert!(lo <= 1.0);
        assert_eq!(hi, 1.0);
    }
}
