//! Platoon geometry and per-slot imperfect-CSI channel sampling.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Error, Result};
use crate::matrix::Square;
use crate::units;

/// Kinematics of an equally spaced platoon. All values in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatoonConfig {
    pub vehicle_count: usize,
    /// Driving velocity in m/s.
    pub velocity: f64,
    /// Minimum intra-platoon spacing in meters.
    pub min_spacing: f64,
    /// Desired time headway in seconds.
    pub time_headway: f64,
    /// Maximum speed in m/s.
    pub max_speed: f64,
    /// Slot (coherence-time) duration in seconds.
    pub slot_duration: f64,
}

impl Default for PlatoonConfig {
    fn default() -> Self {
        Self {
            vehicle_count: 8,
            velocity: units::kmh_to_ms(108.0),
            min_spacing: 3.0,
            time_headway: 1.5,
            max_speed: units::kmh_to_ms(180.0),
            slot_duration: 1e-3,
        }
    }
}

impl PlatoonConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.vehicle_count >= 2, "vehicle_count", "a platoon needs at least 2 vehicles")?;
        ensure(self.max_speed > 0.0, "max_speed", "must be positive")?;
        ensure(
            self.velocity >= 0.0 && self.velocity < self.max_speed,
            "velocity",
            "must satisfy 0 <= v < max_speed",
        )?;
        ensure(self.min_spacing > 0.0, "min_spacing", "must be positive")?;
        ensure(self.time_headway > 0.0, "time_headway", "must be positive")?;
        ensure(self.slot_duration > 0.0, "slot_duration", "must be positive")
    }

    /// Distance between vehicles `k` and `n`: `|k - n| * d_v`.
    pub fn distances(&self) -> Result<Square<f64>> {
        let spacing = idm_spacing(self)?;
        Ok(Square::from_fn(self.vehicle_count, |k, n| {
            k.abs_diff(n) as f64 * spacing
        }))
    }
}

/// Large-scale fading and channel-estimation error statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Path-loss factor `G` as a linear power gain.
    pub pathloss_factor: f64,
    pub pathloss_exponent: f64,
    /// Variance of the complex Gaussian estimation error.
    pub est_error_var: f64,
}

/// Default estimation-error variance; see the README for how it was chosen.
pub const DEFAULT_EST_ERROR_VAR: f64 = 1e-11;

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            pathloss_factor: units::db_to_linear(-31.5),
            pathloss_exponent: 2.0,
            est_error_var: DEFAULT_EST_ERROR_VAR,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.pathloss_factor > 0.0, "pathloss_factor", "must be positive")?;
        ensure(self.pathloss_exponent >= 0.0, "pathloss_exponent", "must be nonnegative")?;
        ensure(self.est_error_var >= 0.0, "est_error_var", "must be nonnegative")
    }

    /// Mean of `|h_kn|^2` at distance `d`: `G d^-phi`.
    pub fn mean_gain(&self, distance: f64) -> f64 {
        self.pathloss_factor * distance.powf(-self.pathloss_exponent)
    }
}

/// Estimated channel power gains for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `|h_kn|^2`; the diagonal is zero and never read.
    pub est_gain_sq: Square<f64>,
    pub distances: Square<f64>,
    pub slot_index: u64,
}

impl ChannelRealization {
    pub fn vehicle_count(&self) -> usize {
        self.est_gain_sq.dim()
    }

    pub fn gain_row(&self, k: usize) -> &[f64] {
        self.est_gain_sq.row(k)
    }
}

/// Equilibrium spacing of the intelligent driver model,
/// `(d0 + v t0) / sqrt(1 - (v / vm)^4)`.
pub fn idm_spacing(cfg: &PlatoonConfig) -> Result<f64> {
    if !(cfg.velocity >= 0.0 && cfg.velocity < cfg.max_speed) {
        return Err(Error::Domain(format!(
            "velocity {} m/s outside [0, {}) m/s",
            cfg.velocity, cfg.max_speed
        )));
    }
    let ratio = cfg.velocity / cfg.max_speed;
    let denom = (1.0 - ratio.powi(4)).sqrt();
    Ok((cfg.min_spacing + cfg.velocity * cfg.time_headway) / denom)
}

/// Draws one slot of estimated gains. Each off-diagonal entry is
/// `G d^-phi |g|^2` with `g` an independent unit-variance circular complex
/// Gaussian.
pub fn sample_channel<R: Rng + ?Sized>(
    cfg: &PlatoonConfig,
    params: &ChannelParams,
    slot_index: u64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    cfg.validate()?;
    params.validate()?;
    let distances = cfg.distances()?;
    Ok(sample_with_distances(&distances, params, slot_index, rng))
}

/// Same as [`sample_channel`] with precomputed distances; used inside the
/// slot loop.
pub fn sample_with_distances<R: Rng + ?Sized>(
    distances: &Square<f64>,
    params: &ChannelParams,
    slot_index: u64,
    rng: &mut R,
) -> ChannelRealization {
    let k = distances.dim();
    let mut gains = Square::zeros(k);
    for tx in 0..k {
        for rx in 0..k {
            if tx == rx {
                continue;
            }
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let fading = 0.5 * (re * re + im * im);
            gains[(tx, rx)] = params.mean_gain(distances[(tx, rx)]) * fading;
        }
    }
    ChannelRealization {
        est_gain_sq: gains,
        distances: distances.clone(),
        slot_index,
    }
}
