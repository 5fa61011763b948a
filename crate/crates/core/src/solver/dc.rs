//! The communication part of the per-slot objective,
//!
//! `O2(P, w) = sum_k sum_n tau w (Q_n - Q_k) R_kn + V tau sum P`,
//!
//! written as a convex part `F+` plus a concave part `F-`. Each rate is
//! `w log2(U / D)` with `D` the robust-rate denominator and `U = D + p g`,
//! so `F- = sum tau w a log2 D` and `F+ = -sum tau w a log2 U + V tau sum P`
//! with `a = Q_k - Q_n`. Only unpruned links (`a > 0`) enter the sums;
//! pruned links carry zero power and contribute nothing to `O2`.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::geometry::ChannelRealization;
use crate::lyapunov::prune_links;
use crate::matrix::Square;
use crate::phy::RadioParams;

/// How senders share the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Access {
    /// One band per sender, carrying superposed signals for all targets.
    Noma,
    /// One orthogonal band per (sender, target) pair.
    Oma,
}

/// Value of `O2` and its two parts at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcSplit {
    pub f_plus: f64,
    pub f_minus: f64,
    pub o2: f64,
}

#[derive(Debug, Clone)]
pub struct DcObjective {
    access: Access,
    vehicles: usize,
    gains: Square<f64>,
    /// `Q_k - Q_n` on unpruned links, zero elsewhere.
    link_weight: Square<f64>,
    targets: Vec<Vec<usize>>,
    noise_psd: f64,
    /// `ln(1/eta0) sigma_h^2`.
    error_term: f64,
    weight: f64,
    tau: f64,
    max_power: f64,
    total_bandwidth: f64,
}

impl DcObjective {
    pub fn new(
        access: Access,
        channel: &ChannelRealization,
        backlog: &[f64],
        radio: &RadioParams,
        est_error_var: f64,
        weight: f64,
        tau: f64,
    ) -> Result<Self> {
        let vehicles = channel.vehicle_count();
        if backlog.len() != vehicles {
            return Err(Error::Domain(format!(
                "{} queues for {vehicles} vehicles",
                backlog.len()
            )));
        }
        radio.validate()?;
        let mask = prune_links(backlog);
        let link_weight = Square::from_fn(vehicles, |k, n| {
            if mask[(k, n)] {
                backlog[k] - backlog[n]
            } else {
                0.0
            }
        });
        let targets = (0..vehicles)
            .map(|k| (0..vehicles).filter(|&n| mask[(k, n)]).collect())
            .collect();
        Ok(Self {
            access,
            vehicles,
            gains: channel.est_gain_sq.clone(),
            link_weight,
            targets,
            noise_psd: radio.noise_psd,
            error_term: radio.outage_log_factor()? * est_error_var,
            weight,
            tau,
            max_power: radio.max_tx_power,
            total_bandwidth: radio.total_bandwidth,
        })
    }

    pub fn access(&self) -> Access {
        self.access
    }

    pub fn vehicles(&self) -> usize {
        self.vehicles
    }

    pub fn max_power(&self) -> f64 {
        self.max_power
    }

    pub fn total_bandwidth(&self) -> f64 {
        self.total_bandwidth
    }

    /// Unpruned targets of sender `k`.
    pub fn targets(&self, k: usize) -> &[usize] {
        &self.targets[k]
    }

    pub fn link_weight(&self, k: usize, n: usize) -> f64 {
        self.link_weight[(k, n)]
    }

    pub fn active_senders(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vehicles).filter(|&k| !self.targets[k].is_empty())
    }

    /// Length of the bandwidth vector: one entry per sender for NOMA, one
    /// per ordered pair (row-major) for OMA.
    pub fn band_len(&self) -> usize {
        match self.access {
            Access::Noma => self.vehicles,
            Access::Oma => self.vehicles * self.vehicles,
        }
    }

    /// Index of the band that carries link `k -> n`.
    pub fn band_index(&self, k: usize, n: usize) -> usize {
        match self.access {
            Access::Noma => k,
            Access::Oma => k * self.vehicles + n,
        }
    }

    /// Band entries that are optimization variables.
    pub fn active_bands(&self) -> Vec<usize> {
        match self.access {
            Access::Noma => self.active_senders().collect(),
            Access::Oma => (0..self.vehicles)
                .flat_map(|k| self.targets[k].iter().map(move |&n| (k, n)))
                .map(|(k, n)| self.band_index(k, n))
                .collect(),
        }
    }

    /// The spread-evenly starting point: every active band gets an equal
    /// share of `W0` and every sender splits `P0` evenly over its targets.
    pub fn even_start(&self) -> (Square<f64>, Vec<f64>) {
        let mut power = Square::zeros(self.vehicles);
        let mut band = vec![0.0; self.band_len()];
        for k in self.active_senders() {
            let share = self.max_power / self.targets[k].len() as f64;
            for &n in &self.targets[k] {
                power[(k, n)] = share;
            }
        }
        let bands = self.active_bands();
        if !bands.is_empty() {
            let share = self.total_bandwidth / bands.len() as f64;
            for b in bands {
                band[b] = share;
            }
        }
        (power, band)
    }

    /// Robust-rate denominator `D` for link `k -> n` (without the `p g`
    /// signal term) given the sender's power row.
    fn denominator(&self, k: usize, n: usize, row: &[f64], band: f64, total: f64) -> f64 {
        let g = self.gains.row(k);
        match self.access {
            Access::Noma => {
                let own = g[n];
                let interference: f64 = self.targets[k]
                    .iter()
                    .filter(|&&i| i != n && g[i] > own)
                    .map(|&i| row[i])
                    .sum();
                own * interference + band * self.noise_psd + self.error_term * total
            }
            Access::Oma => band * self.noise_psd + self.error_term * row[n],
        }
    }

    fn row_total(&self, k: usize, row: &[f64]) -> f64 {
        self.targets[k].iter().map(|&n| row[n]).sum()
    }

    /// `(F+, F-, O2)` contributions of sender `k`.
    pub fn sender_split(&self, k: usize, row: &[f64], band: &[f64]) -> DcSplit {
        let total = self.row_total(k, row);
        let energy = self.weight * self.tau * total;
        let mut f_plus = energy;
        let mut f_minus = 0.0;
        let mut rate_term = 0.0;
        for &n in &self.targets[k] {
            let w = band[self.band_index(k, n)];
            if w <= 0.0 {
                continue;
            }
            let a = self.link_weight[(k, n)];
            let d = self.denominator(k, n, row, w, total);
            let signal = row[n] * self.gains[(k, n)];
            let coeff = self.tau * w * a / LN_2;
            f_minus += coeff * d.ln();
            f_plus -= coeff * (d + signal).ln();
            if signal > 0.0 {
                rate_term -= coeff * (signal / d).ln_1p();
            }
        }
        DcSplit {
            f_plus,
            f_minus,
            o2: energy + rate_term,
        }
    }

    /// `O2` contribution of sender `k`, evaluated without splitting so that
    /// weak links do not lose precision.
    pub fn sender_o2(&self, k: usize, row: &[f64], band: &[f64]) -> f64 {
        self.sender_split(k, row, band).o2
    }

    /// Evaluates both parts and `O2` over all senders.
    pub fn dc_split_eval(&self, power: &Square<f64>, band: &[f64]) -> Result<DcSplit> {
        let mut acc = DcSplit {
            f_plus: 0.0,
            f_minus: 0.0,
            o2: 0.0,
        };
        for k in 0..self.vehicles {
            let row = power.row(k);
            for &n in &self.targets[k] {
                let w = band[self.band_index(k, n)];
                if w > 0.0 && self.denominator(k, n, row, w, self.row_total(k, row)) <= 0.0 {
                    return Err(Error::Domain(format!(
                        "nonpositive log argument on link {k} -> {n}"
                    )));
                }
            }
            let s = self.sender_split(k, row, band);
            acc.f_plus += s.f_plus;
            acc.f_minus += s.f_minus;
            acc.o2 += s.o2;
        }
        Ok(acc)
    }

    pub fn o2(&self, power: &Square<f64>, band: &[f64]) -> f64 {
        (0..self.vehicles)
            .map(|k| self.sender_o2(k, power.row(k), band))
            .sum()
    }

    /// Gradient of sender `k`'s `F-` with respect to its power row. Entries
    /// outside the sender's targets are left at zero.
    pub fn f_minus_grad(&self, k: usize, row: &[f64], band: &[f64], grad: &mut [f64]) {
        grad.fill(0.0);
        let total = self.row_total(k, row);
        let g = self.gains.row(k);
        for &n in &self.targets[k] {
            let w = band[self.band_index(k, n)];
            if w <= 0.0 {
                continue;
            }
            let d = self.denominator(k, n, row, w, total);
            let coeff = self.tau * w * self.link_weight[(k, n)] / (LN_2 * d);
            match self.access {
                Access::Noma => {
                    for &j in &self.targets[k] {
                        let leak = if j != n && g[j] > g[n] { g[n] } else { 0.0 };
                        grad[j] += coeff * (self.error_term + leak);
                    }
                }
                Access::Oma => grad[n] += coeff * self.error_term,
            }
        }
    }

    /// Value and gradient of sender `k`'s `F+` with respect to its power row.
    pub fn f_plus_grad(&self, k: usize, row: &[f64], band: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        let total = self.row_total(k, row);
        let g = self.gains.row(k);
        let vt = self.weight * self.tau;
        let mut value = vt * total;
        for &j in &self.targets[k] {
            grad[j] = vt;
        }
        for &n in &self.targets[k] {
            let w = band[self.band_index(k, n)];
            if w <= 0.0 {
                continue;
            }
            let u = self.denominator(k, n, row, w, total) + row[n] * g[n];
            let scaled = self.tau * w * self.link_weight[(k, n)] / LN_2;
            value -= scaled * u.ln();
            let coeff = scaled / u;
            match self.access {
                Access::Noma => {
                    for &j in &self.targets[k] {
                        let du = if j == n || g[j] > g[n] {
                            self.error_term + g[n]
                        } else {
                            self.error_term
                        };
                        grad[j] -= coeff * du;
                    }
                }
                Access::Oma => grad[n] -= coeff * (self.error_term + g[n]),
            }
        }
        value
    }

    /// `O2` and its gradient with respect to the full bandwidth vector.
    pub fn band_grad(&self, power: &Square<f64>, band: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        let mut value = 0.0;
        for k in 0..self.vehicles {
            let row = power.row(k);
            let total = self.row_total(k, row);
            value += self.weight * self.tau * total;
            for &n in &self.targets[k] {
                let b = self.band_index(k, n);
                let w = band[b];
                let signal = row[n] * self.gains[(k, n)];
                if w <= 0.0 || signal <= 0.0 {
                    continue;
                }
                let d = self.denominator(k, n, row, w, total);
                let u = d + signal;
                let a = self.link_weight[(k, n)];
                let log_ratio = (signal / d).ln_1p();
                value -= self.tau * w * a * log_ratio / LN_2;
                // d/dw [w log2(U/D)] with dU/dw = dD/dw = N0
                let derivative =
                    log_ratio / LN_2 - w * self.noise_psd * (1.0 / d - 1.0 / u) / LN_2;
                grad[b] -= self.tau * a * derivative;
            }
        }
        value
    }
}
