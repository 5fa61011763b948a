//! Downlink NOMA link model with imperfect CSI.
//!
//! A sender `k` superposes signals for several computing nodes on its own
//! band `w_k`. Receiver `n` cancels the signals intended for nodes with a
//! weaker estimated channel and treats the rest as interference. The
//! channel-estimation error leaks a fraction of every superposed signal
//! into the denominator.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Error, Result};
use crate::units;

/// Radio-level constants shared by every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    /// Noise power spectral density `N0` in W/Hz.
    pub noise_psd: f64,
    /// Total bandwidth `W0` in Hz.
    pub total_bandwidth: f64,
    /// Per-vehicle transmit power budget `P0` in W.
    pub max_tx_power: f64,
    /// Target outage probability `eta0` in (0, 1].
    pub outage_threshold: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            noise_psd: units::dbm_to_watts(-174.0),
            total_bandwidth: 20e6,
            max_tx_power: units::dbm_to_watts(35.0),
            outage_threshold: 0.1,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.noise_psd > 0.0, "noise_psd", "must be positive")?;
        ensure(self.total_bandwidth > 0.0, "total_bandwidth", "must be positive")?;
        ensure(self.max_tx_power > 0.0, "max_tx_power", "must be positive")?;
        ensure(
            self.outage_threshold > 0.0 && self.outage_threshold <= 1.0,
            "outage_threshold",
            "must lie in (0, 1]",
        )
    }

    /// `ln(1 / eta0)`, the multiplier of the estimation-error variance in
    /// the robust rate.
    pub fn outage_log_factor(&self) -> Result<f64> {
        if self.outage_threshold <= 0.0 {
            return Err(Error::Domain("outage threshold must be positive".into()));
        }
        Ok((1.0 / self.outage_threshold).ln())
    }
}

/// Power split and band of one sender.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkAllocation {
    /// Power toward each node (W); the sender's own entry is zero.
    pub power: Vec<f64>,
    /// Bandwidth of the sender (Hz).
    pub bandwidth: f64,
}

impl LinkAllocation {
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// 1 when the signal for node `i` arrives stronger than the one for `n`,
/// in which case receiver `n` cannot cancel it.
pub fn sic_indicator(gains: &[f64], n: usize, i: usize) -> u8 {
    u8::from(gains[i] > gains[n])
}

/// Intra-sender interference seen by receiver `n` after SIC.
fn residual_interference(alloc: &LinkAllocation, gains: &[f64], n: usize) -> f64 {
    let own = gains[n];
    let uncancelled: f64 = alloc
        .power
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != n && gains[i] > own)
        .map(|(_, p)| p)
        .sum();
    own * uncancelled
}

/// Post-SIC SINR at node `n` for a given realization of `|dh|^2`.
pub fn sinr(
    alloc: &LinkAllocation,
    gains: &[f64],
    error_gain_sq: f64,
    params: &RadioParams,
    n: usize,
) -> Result<f64> {
    let denom = residual_interference(alloc, gains, n)
        + error_gain_sq * alloc.total_power()
        + alloc.bandwidth * params.noise_psd;
    if denom <= 0.0 {
        return Err(Error::Domain(format!(
            "SINR denominator is {denom} for node {n}"
        )));
    }
    Ok(alloc.power[n] * gains[n] / denom)
}

/// Instantaneous achievable rate `w log2(1 + SINR)` in bits/s.
pub fn achievable_rate(
    alloc: &LinkAllocation,
    gains: &[f64],
    error_gain_sq: f64,
    params: &RadioParams,
    n: usize,
) -> Result<f64> {
    let gamma = sinr(alloc, gains, error_gain_sq, params, n)?;
    Ok(alloc.bandwidth * gamma.ln_1p() / std::f64::consts::LN_2)
}

/// The largest rate whose outage probability equals `eta0`, given an
/// estimation error variance `est_error_var`.
pub fn robust_rate(
    alloc: &LinkAllocation,
    gains: &[f64],
    params: &RadioParams,
    est_error_var: f64,
    n: usize,
) -> Result<f64> {
    let log_factor = params.outage_log_factor()?;
    if alloc.bandwidth <= 0.0 || alloc.power[n] <= 0.0 {
        return Ok(0.0);
    }
    let denom = residual_interference(alloc, gains, n)
        + alloc.bandwidth * params.noise_psd
        + log_factor * est_error_var * alloc.total_power();
    let ratio = alloc.power[n] * gains[n] / denom;
    Ok(alloc.bandwidth * ratio.ln_1p() / std::f64::consts::LN_2)
}

/// Monte Carlo estimate of `Pr{achievable <= robust}` over draws of the
/// estimation error `dh ~ CN(0, est_error_var)`.
pub fn outage_oracle<R: Rng + ?Sized>(
    alloc: &LinkAllocation,
    gains: &[f64],
    params: &RadioParams,
    est_error_var: f64,
    n: usize,
    draws: usize,
    rng: &mut R,
) -> Result<f64> {
    ensure(draws > 0, "draws", "must be positive")?;
    let target = robust_rate(alloc, gains, params, est_error_var, n)?;
    let mut outages = 0usize;
    for _ in 0..draws {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let error_gain_sq = 0.5 * est_error_var * (re * re + im * im);
        if achievable_rate(alloc, gains, error_gain_sq, params, n)? <= target {
            outages += 1;
        }
    }
    Ok(outages as f64 / draws as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    fn unit_params(eta0: f64) -> RadioParams {
        RadioParams {
            noise_psd: 1.0,
            total_bandwidth: 1.0,
            max_tx_power: 10.0,
            outage_threshold: eta0,
        }
    }

    fn single(p: f64, w: f64) -> LinkAllocation {
        LinkAllocation {
            power: vec![0.0, p],
            bandwidth: w,
        }
    }

    #[test]
    fn indicator_is_strict() {
        let g = [0.0, 1.0, 2.0, 0.5];
        assert_eq!(sic_indicator(&g, 1, 2), 1);
        assert_eq!(sic_indicator(&[0.0, 1.0, 1.0], 1, 2), 0);
        assert_eq!(sic_indicator(&g, 1, 3), 0);
    }

    #[test]
    fn sinr_single_link_is_snr() {
        let g = [0.0, 3.0];
        let s = sinr(&single(2.0, 0.5), &g, 0.0, &unit_params(0.1), 1).unwrap();
        assert!((s - 2.0 * 3.0 / 0.5).abs() < 1e-12);
    }

    #[test]
    fn sinr_stronger_interferer_counts_weaker_is_cancelled() {
        let params = unit_params(0.1);
        // target at gain 1, interferer at gain 2
        let alloc = LinkAllocation {
            power: vec![0.0, 1.0, 1.0],
            bandwidth: 1.0,
        };
        let g = [0.0, 1.0, 2.0];
        assert!((sinr(&alloc, &g, 0.0, &params, 1).unwrap() - 0.5).abs() < 1e-15);
        // the strong receiver cancels the weak signal entirely
        assert!((sinr(&alloc, &g, 0.0, &params, 2).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sinr_rejects_zero_denominator() {
        let alloc = LinkAllocation {
            power: vec![0.0, 0.0],
            bandwidth: 0.0,
        };
        assert!(sinr(&alloc, &[0.0, 1.0], 0.0, &unit_params(0.1), 1).is_err());
    }

    #[test]
    fn achievable_rate_examples() {
        let params = unit_params(0.1);
        let g = [0.0, 1.0];
        // Gamma = 1 with w = 10: p*1/(10*1) = 1
        let r = achievable_rate(&single(10.0, 10.0), &g, 0.0, &params, 1).unwrap();
        assert!((r - 10.0).abs() < 1e-12);
        let r = achievable_rate(&single(0.0, 10.0), &g, 0.0, &params, 1).unwrap();
        assert_eq!(r, 0.0);
        // Gamma = 3 with w = 2: 2 log2 4
        let r = achievable_rate(&single(6.0, 2.0), &g, 0.0, &params, 1).unwrap();
        assert!((r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn robust_rate_examples() {
        let g = [0.0, 1.0];
        let r = robust_rate(&single(1.0, 1.0), &g, &unit_params(0.1), 0.0, 1).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        let eta = (-1.0f64).exp();
        let r = robust_rate(&single(1.0, 1.0), &g, &unit_params(eta), 1.0, 1).unwrap();
        assert!((r - 1.5f64.log2()).abs() < 1e-12);
        assert!((r - 0.58496).abs() < 1e-5);
        assert_eq!(robust_rate(&single(1.0, 0.0), &g, &unit_params(0.1), 1.0, 1).unwrap(), 0.0);
        assert_eq!(robust_rate(&single(0.0, 1.0), &g, &unit_params(0.1), 1.0, 1).unwrap(), 0.0);
        assert!(robust_rate(&single(1.0, 1.0), &g, &unit_params(0.0), 1.0, 1).is_err());
    }

    #[test]
    fn robust_equals_achievable_without_error() {
        let g = [0.0, 0.7];
        let params = unit_params(0.3);
        let a = single(1.3, 2.1);
        assert_eq!(
            robust_rate(&a, &g, &params, 0.0, 1).unwrap(),
            achievable_rate(&a, &g, 0.0, &params, 1).unwrap()
        );
    }

    #[test]
    fn robust_rate_monotonicity_grid() {
        let g = [0.0, 1.0, 2.0];
        let base = |p_own: f64, p_other: f64| LinkAllocation {
            power: vec![0.0, p_own, p_other],
            bandwidth: 1.0,
        };
        let params = unit_params(0.1);
        let mut prev = 0.0;
        for i in 1..50 {
            let r = robust_rate(&base(i as f64 * 0.1, 1.0), &g, &params, 0.5, 1).unwrap();
            assert!(r >= prev);
            prev = r;
        }
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let r = robust_rate(&base(1.0, i as f64 * 0.1), &g, &params, 0.5, 1).unwrap();
            assert!(r <= prev);
            prev = r;
        }
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let r = robust_rate(&base(1.0, 1.0), &g, &params, i as f64 * 0.1, 1).unwrap();
            assert!(r <= prev);
            prev = r;
        }
        let mut prev = f64::INFINITY;
        for i in 1..=50 {
            let r = robust_rate(&base(1.0, 1.0), &g, &unit_params(1.0 - i as f64 * 0.019), 0.5, 1)
                .unwrap();
            assert!(r <= prev);
            prev = r;
        }
    }

    #[test]
    fn oracle_degenerate_cases() {
        let g = [0.0, 1.0];
        let mut rng = stream_rng(1, Stream::Oracle);
        // zero error variance: achievable equals robust, ties count as outage
        let p = outage_oracle(&single(1.0, 1.0), &g, &unit_params(0.1), 0.0, 1, 10_000, &mut rng)
            .unwrap();
        assert_eq!(p, 1.0);
        let p = outage_oracle(&single(1.0, 1.0), &g, &unit_params(1.0), 0.3, 1, 10_000, &mut rng)
            .unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn oracle_matches_target() {
        let g = [0.0, 1.0, 2.0, 0.4];
        let alloc = LinkAllocation {
            power: vec![0.0, 0.8, 0.5, 0.3],
            bandwidth: 1.5,
        };
        let mut rng = stream_rng(2, Stream::Oracle);
        let p = outage_oracle(&alloc, &g, &unit_params(0.1), 0.2, 1, 100_000, &mut rng).unwrap();
        assert!((p - 0.1).abs() < 0.02, "{p}");
    }
}
