//! Fading channel models: link budgets, Rayleigh fading, log-normal
//! shadowing, capacity, non-cooperative outage, and frequency-selective OFDM
//! subcarrier channels.
//!
//! All SNRs are linear (never dB) inside the library; conversions happen at
//! the configuration boundary.

use crate::error::{Error, Result};
use crate::special::expint_ei;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

/// Large-scale parameters of one transmitter-receiver link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    /// Transmit power in watts.
    pub tx_power: f64,
    /// Noise spectral density in W/Hz.
    pub noise_density: f64,
    /// Bandwidth in Hz.
    pub bandwidth: f64,
    /// Transmit antenna gain, linear.
    pub tx_gain: f64,
    /// Receive antenna gain, linear.
    pub rx_gain: f64,
    /// Distance in meters.
    pub distance: f64,
    /// Path-loss exponent, in [2, 4].
    pub path_loss_exponent: f64,
    /// Log-normal shadowing spread in dB (zero-dB median).
    pub shadowing_sigma_db: f64,
    /// Rate scaling for the relaying mode: 1.0 (ideal full duplex, default)
    /// or 0.5 (half duplex).
    pub half_duplex_factor: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams {
            tx_power: 1.0,
            noise_density: 1.0,
            bandwidth: 1.0,
            tx_gain: 1.0,
            rx_gain: 1.0,
            distance: 1.0,
            path_loss_exponent: 3.0,
            shadowing_sigma_db: 8.0,
            half_duplex_factor: 1.0,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("tx_power", self.tx_power),
            ("noise_density", self.noise_density),
            ("bandwidth", self.bandwidth),
            ("tx_gain", self.tx_gain),
            ("rx_gain", self.rx_gain),
            ("distance", self.distance),
        ];
        for (name, v) in positives {
            if !(v > 0.0) {
                return Err(Error::domain(format!("{name} must be strictly positive, got {v}")));
            }
        }
        if !(2.0..=4.0).contains(&self.path_loss_exponent) {
            return Err(Error::domain(format!(
                "path_loss_exponent must lie in [2, 4], got {}",
                self.path_loss_exponent
            )));
        }
        if self.half_duplex_factor != 1.0 && self.half_duplex_factor != 0.5 {
            return Err(Error::domain(format!(
                "half_duplex_factor must be 0.5 or 1.0, got {}",
                self.half_duplex_factor
            )));
        }
        Ok(())
    }
}

/// One link with its average SNR and a drawn fading realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    /// Average SNR, linear.
    pub gamma_bar: f64,
    /// Instantaneous SNR, linear.
    pub gamma: f64,
    /// Squared fading coefficient, so that gamma = gamma_bar * fading_coeff_sq.
    pub fading_coeff_sq: f64,
}

impl LinkState {
    /// Draws a Rayleigh-fading realization of a link with the given mean SNR.
    pub fn draw<R: Rng + ?Sized>(gamma_bar: f64, rng: &mut R) -> Result<Self> {
        let gamma = draw_fading(gamma_bar, rng)?;
        Ok(LinkState { gamma_bar, gamma, fading_coeff_sq: gamma / gamma_bar })
    }
}

/// Average SNR of a link from its budget and a multiplicative shadowing
/// factor: (P_T / (N_0 W)) * G_T * G_R * s * d^(-a).
pub fn average_snr(params: &LinkParams, shadow_factor: f64) -> Result<f64> {
    params.validate()?;
    if !(shadow_factor > 0.0) {
        return Err(Error::domain(format!("shadow factor must be positive, got {shadow_factor}")));
    }
    let snr = params.tx_power / (params.noise_density * params.bandwidth)
        * params.tx_gain
        * params.rx_gain
        * shadow_factor
        * params.distance.powf(-params.path_loss_exponent);
    Ok(snr)
}

/// Draws a log-normal shadowing factor with the given dB spread and a median
/// of one (zero dB).
pub fn draw_shadowing<R: Rng + ?Sized>(sigma_db: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    10f64.powf(sigma_db * z / 10.0)
}

/// Draws an instantaneous SNR under Rayleigh fading: exponential with mean
/// `gamma_bar`.
pub fn draw_fading<R: Rng + ?Sized>(gamma_bar: f64, rng: &mut R) -> Result<f64> {
    if !(gamma_bar > 0.0) {
        return Err(Error::domain(format!("mean SNR must be positive, got {gamma_bar}")));
    }
    let e: f64 = rng.sample(Exp1);
    Ok(gamma_bar * e)
}

/// Link capacity log2(1 + snr) in bits/s/Hz.
pub fn capacity(snr: f64) -> Result<f64> {
    if snr < 0.0 {
        return Err(Error::domain(format!("SNR must be nonnegative, got {snr}")));
    }
    Ok((1.0 + snr).log2())
}

/// Non-cooperative outage probability of a Rayleigh link:
/// Pr(capacity < D) = 1 - exp(-(2^D - 1) / gamma_bar).
pub fn outage_prob_direct(desired_rate: f64, gamma_bar: f64) -> Result<f64> {
    if desired_rate < 0.0 {
        return Err(Error::domain(format!("desired rate must be nonnegative, got {desired_rate}")));
    }
    if !(gamma_bar > 0.0) {
        return Err(Error::domain(format!("mean SNR must be positive, got {gamma_bar}")));
    }
    Ok(1.0 - (-(2f64.powf(desired_rate) - 1.0) / gamma_bar).exp())
}

/// Mean SNR at which a Rayleigh link misses `desired_rate` with probability
/// `outage_prob`; the inverse of [`outage_prob_direct`] in `gamma_bar`.
pub fn snr_for_direct_outage(desired_rate: f64, outage_prob: f64) -> Result<f64> {
    if desired_rate <= 0.0 {
        return Err(Error::domain(format!("desired rate must be positive, got {desired_rate}")));
    }
    if !(outage_prob > 0.0 && outage_prob < 1.0) {
        return Err(Error::domain(format!(
            "outage probability must lie strictly inside (0, 1), got {outage_prob}"
        )));
    }
    Ok((2f64.powf(desired_rate) - 1.0) / -(1.0 - outage_prob).ln())
}

// ======================================================================
// OFDM
// ======================================================================

/// A drawn frequency-selective channel: per-subcarrier instantaneous SNRs.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmLinkState {
    pub subcarrier_snrs: Vec<f64>,
    pub num_subcarriers: usize,
    pub num_taps: usize,
    /// Average per-subcarrier SNR, linear.
    pub gamma_bar: f64,
}

/// Frequency-selective channel generator with precomputed tap profile and
/// DFT twiddle factors.
///
/// The impulse response has `num_taps` independent complex Gaussian taps with
/// an exponentially decaying power profile (tap m carries power proportional
/// to e^(-m/L)), normalized to unit total power so each subcarrier SNR is
/// marginally exponential with mean `gamma_bar`.
#[derive(Debug, Clone)]
pub struct OfdmModel {
    k_tilde: usize,
    num_taps: usize,
    gamma_bar: f64,
    /// Standard deviation of the real/imaginary part of each tap.
    tap_sigma: Vec<f64>,
    /// cos/sin of -2*pi*k*m/K, indexed [m][k].
    twiddles: Vec<Vec<(f64, f64)>>,
}

impl OfdmModel {
    pub fn new(gamma_bar: f64, k_tilde: usize, num_taps: usize) -> Result<Self> {
        if k_tilde < 1 || num_taps < 1 {
            return Err(Error::domain(format!(
                "OFDM needs at least one subcarrier and one tap, got {k_tilde} and {num_taps}"
            )));
        }
        if !(gamma_bar > 0.0) {
            return Err(Error::domain(format!("mean SNR must be positive, got {gamma_bar}")));
        }
        let l = num_taps as f64;
        let raw: Vec<f64> = (0..num_taps).map(|m| (-(m as f64) / l).exp()).collect();
        let total: f64 = raw.iter().sum();
        // Each tap is CN(0, p_m); sigma is per real component.
        let tap_sigma: Vec<f64> = raw.iter().map(|p| (p / total / 2.0).sqrt()).collect();
        let twiddles = (0..num_taps)
            .map(|m| {
                (0..k_tilde)
                    .map(|k| {
                        let angle = -2.0 * std::f64::consts::PI * (k * m) as f64 / k_tilde as f64;
                        (angle.cos(), angle.sin())
                    })
                    .collect()
            })
            .collect();
        Ok(OfdmModel { k_tilde, num_taps, gamma_bar, tap_sigma, twiddles })
    }

    /// Draws one channel realization.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> OfdmLinkState {
        let taps: Vec<(f64, f64)> = self
            .tap_sigma
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                (s * re, s * im)
            })
            .collect();
        let mut snrs = vec![0.0; self.k_tilde];
        for (k, snr) in snrs.iter_mut().enumerate() {
            let mut re = 0.0;
            let mut im = 0.0;
            for (m, &(tr, ti)) in taps.iter().enumerate() {
                let (c, s) = self.twiddles[m][k];
                re += tr * c - ti * s;
                im += tr * s + ti * c;
            }
            *snr = self.gamma_bar * (re * re + im * im);
        }
        OfdmLinkState {
            subcarrier_snrs: snrs,
            num_subcarriers: self.k_tilde,
            num_taps: self.num_taps,
            gamma_bar: self.gamma_bar,
        }
    }
}

/// Convenience wrapper: builds the model and draws one realization.
pub fn ofdm_draw<R: Rng + ?Sized>(
    gamma_bar: f64,
    k_tilde: usize,
    num_taps: usize,
    rng: &mut R,
) -> Result<OfdmLinkState> {
    Ok(OfdmModel::new(gamma_bar, k_tilde, num_taps)?.draw(rng))
}

/// Aggregate capacity of a set of subcarriers: sum of log2(1 + snr_k).
pub fn ofdm_capacity(state: &OfdmLinkState, subset: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for &k in subset {
        let snr = *state
            .subcarrier_snrs
            .get(k)
            .ok_or_else(|| Error::domain(format!("subcarrier index {k} out of range")))?;
        total += (1.0 + snr).log2();
    }
    Ok(total)
}

/// Normal approximation of the sum capacity of `j` subcarriers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalCapacityApprox {
    /// Exact mean: -(j / ln 2) e^(1/gamma0) Ei(-1/gamma0).
    pub mean: f64,
    /// Empirical variance of the j-subcarrier sum capacity, if channel
    /// samples were supplied. There is no closed form for the
    /// inter-subcarrier covariance.
    pub variance: Option<f64>,
}

/// Mean and (empirical) variance of the sum capacity over `j` subcarriers
/// with per-subcarrier mean SNR `gamma0`.
///
/// The mean is exact for Rayleigh fading. The variance is estimated from the
/// supplied channel draws: directly as the sample variance of the
/// j-subcarrier partial sum when the samples are wide enough, otherwise by
/// linear extrapolation of the full-width sum variance (valid when the
/// correlation length is well below the sampled width).
pub fn gaussian_capacity_approx(
    j: usize,
    gamma0: f64,
    samples: Option<&[OfdmLinkState]>,
) -> Result<NormalCapacityApprox> {
    if j < 1 {
        return Err(Error::domain("subcarrier count must be >= 1"));
    }
    if !(gamma0 > 0.0) {
        return Err(Error::domain(format!("mean SNR must be positive, got {gamma0}")));
    }
    if 1.0 / gamma0 > 700.0 {
        return Err(Error::numeric(format!(
            "mean SNR {gamma0} too small: exp(1/gamma0) overflows in the capacity mean"
        )));
    }
    let ei = expint_ei(-1.0 / gamma0)?;
    let mean = -(j as f64) / std::f64::consts::LN_2 * (1.0 / gamma0).exp() * ei;
    let variance = match samples {
        None => None,
        Some(states) if states.len() < 2 => {
            return Err(Error::domain("variance estimation needs at least two channel samples"))
        }
        Some(states) => {
            let width = states[0].num_subcarriers;
            let take = j.min(width);
            let sums: Vec<f64> = states
                .iter()
                .map(|s| {
                    s.subcarrier_snrs[..take].iter().map(|&g| (1.0 + g).log2()).sum::<f64>()
                })
                .collect();
            let n = sums.len() as f64;
            let m = sums.iter().sum::<f64>() / n;
            let var = sums.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (n - 1.0);
            Some(var * j as f64 / take as f64)
        }
    };
    Ok(NormalCapacityApprox { mean, variance })
}
