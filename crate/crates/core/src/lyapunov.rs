//! Drift-plus-penalty scheduling: per-slot objective, the closed-form CPU
//! frequency, link pruning and the per-realization Lyapunov bound.

use crate::error::{Error, Result};
use crate::exact::DoubleDouble;
use crate::matrix::Square;
use crate::queueing::{slot_energy, slot_flows, ComputeParams, QueueState, SlotFlows};

/// Resource allocation of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// `power[(k, n)]`: watts sender `k` spends on data for node `n`.
    pub power: Square<f64>,
    /// Bandwidth per sender (Hz). OMA decisions keep their per-pair bands
    /// in [`Decision::pair_bandwidth`] and leave this at the row totals.
    pub bandwidth: Vec<f64>,
    pub pair_bandwidth: Option<Square<f64>>,
    /// CPU frequency per vehicle (cycles/s).
    pub cpu_freq: Vec<f64>,
}

impl Decision {
    pub fn idle(vehicles: usize) -> Self {
        Self {
            power: Square::zeros(vehicles),
            bandwidth: vec![0.0; vehicles],
            pair_bandwidth: None,
            cpu_freq: vec![0.0; vehicles],
        }
    }

    pub fn vehicles(&self) -> usize {
        self.cpu_freq.len()
    }

    /// Checks the per-slot power, bandwidth and frequency constraints with
    /// a slack relative to each budget.
    pub fn audit(&self, max_power: f64, total_bandwidth: f64, max_freq: f64, slack: f64) -> Result<()> {
        let k = self.vehicles();
        let fail = |what: String| Err(Error::Consistency(what));
        for tx in 0..k {
            if self.power[(tx, tx)] != 0.0 {
                return fail(format!("vehicle {tx} transmits to itself"));
            }
            if self.power.row(tx).iter().any(|&p| p < 0.0) {
                return fail(format!("negative power at vehicle {tx}"));
            }
            if self.power.row_sum(tx) > max_power * (1.0 + slack) {
                return fail(format!("power budget exceeded at vehicle {tx}"));
            }
            let f = self.cpu_freq[tx];
            if !(0.0..=max_freq * (1.0 + slack)).contains(&f) {
                return fail(format!("cpu frequency {f} out of range at vehicle {tx}"));
            }
        }
        let band_total: f64 = match &self.pair_bandwidth {
            Some(pairs) => {
                if pairs.as_slice().iter().any(|&w| w < 0.0) {
                    return fail("negative pair bandwidth".into());
                }
                pairs.total()
            }
            None => {
                if self.bandwidth.iter().any(|&w| w < 0.0) {
                    return fail("negative bandwidth".into());
                }
                self.bandwidth.iter().sum()
            }
        };
        if band_total > total_bandwidth * (1.0 + slack) {
            return fail(format!("bandwidth {band_total} exceeds {total_bandwidth}"));
        }
        Ok(())
    }
}

/// Components of the per-slot drift-plus-penalty objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftPenaltyTerms {
    pub total: f64,
    pub compute_term: f64,
    pub comm_term: f64,
    pub arrival_term: f64,
    pub weight: f64,
}

/// `f* = min(sqrt(Q / (3 V xi eps)), f_m)`.
pub fn optimal_cpu_freq(backlog: f64, weight: f64, compute: &ComputeParams) -> f64 {
    if backlog <= 0.0 {
        return 0.0;
    }
    let unconstrained = (backlog / (3.0 * weight * compute.energy_coeff * compute.workload)).sqrt();
    unconstrained.min(compute.max_freq)
}

/// The computing part of the objective for one vehicle,
/// `V xi f^3 tau - Q f tau / eps`.
pub fn compute_term(backlog: f64, freq: f64, weight: f64, compute: &ComputeParams, tau: f64) -> f64 {
    weight * compute.energy_coeff * freq.powi(3) * tau - backlog * freq * tau / compute.workload
}

/// Evaluates `sum Q (A - D) + V E` directly and through the split into the
/// arrival, computing and communication parts, and checks that both agree.
///
/// Agreement is measured relative to `sum Q (A + D) + V E`, the magnitude of
/// the summands, since the objective itself may cancel to near zero.
pub fn drift_penalty_objective(
    decision: &Decision,
    queues: &QueueState,
    rates: &Square<f64>,
    generated: &[f64],
    compute: &ComputeParams,
    weight: f64,
    tau: f64,
) -> Result<DriftPenaltyTerms> {
    let k = queues.backlog.len();
    let q = &queues.backlog;
    let flows = slot_flows(decision, rates, generated, compute, tau);
    let energy = slot_energy(decision, compute, tau);

    let direct = (0..k)
        .map(|i| q[i] * (flows.arrivals(i) - flows.departures(i)))
        .sum::<f64>()
        + weight * energy.total;
    let scale = (0..k)
        .map(|i| q[i] * (flows.arrivals(i) + flows.departures(i)))
        .sum::<f64>()
        + weight * energy.total;

    let arrival_term: f64 = (0..k).map(|i| q[i] * generated[i]).sum();
    let compute_part: f64 = (0..k)
        .map(|i| compute_term(q[i], decision.cpu_freq[i], weight, compute, tau))
        .sum();
    let mut comm_term = weight * decision.power.total() * tau;
    for tx in 0..k {
        for rx in 0..k {
            if tx != rx {
                comm_term += tau * (q[rx] - q[tx]) * rates[(tx, rx)];
            }
        }
    }
    let total = arrival_term + compute_part + comm_term;
    if (total - direct).abs() > 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Consistency(format!(
            "objective split {total} differs from direct evaluation {direct}"
        )));
    }
    Ok(DriftPenaltyTerms {
        total,
        compute_term: compute_part,
        comm_term,
        arrival_term,
        weight,
    })
}

/// Both sides of the one-slot Lyapunov bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// `L(t+1) - L(t) + V E`.
    pub lhs: f64,
    /// `1/2 sum (D^2 + A^2) + sum Q (A - D) + V E`.
    pub rhs: f64,
}

impl BoundCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

pub fn lyapunov_bound_check(
    before: &QueueState,
    after: &QueueState,
    flows: &SlotFlows,
    energy_total: f64,
    weight: f64,
) -> BoundCheck {
    // Both sides are accumulated in double-double so that the comparison
    // is not swamped by rounding of terms of order Q^2.
    let penalty = weight * energy_total;
    let mut lhs = DoubleDouble::default().add(penalty);
    let mut rhs = DoubleDouble::default().add(penalty);
    for i in 0..before.backlog.len() {
        let (q0, q1) = (before.backlog[i], after.backlog[i]);
        let (d, a) = (flows.departures(i), flows.arrivals(i));
        lhs = lhs.add_product(0.5 * q1, q1).add_product(-0.5 * q0, q0);
        rhs = rhs
            .add_product(0.5 * d, d)
            .add_product(0.5 * a, a)
            .add_product(q0, a)
            .add_product(-q0, d);
    }
    BoundCheck {
        lhs: lhs.value(),
        rhs: rhs.value(),
    }
}

/// Links worth using: `k -> n` only when `Q_k > Q_n`.
pub fn prune_links(backlog: &[f64]) -> Square<bool> {
    Square::from_fn(backlog.len(), |k, n| k != n && backlog[k] > backlog[n])
}
