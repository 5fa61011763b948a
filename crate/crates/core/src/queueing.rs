//! Task arrivals, per-slot data flows, queue evolution and energy.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{ensure, Result};
use crate::exact::add_down;
use crate::lyapunov::Decision;
use crate::matrix::Square;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalConfig {
    /// Mean number of new tasks per vehicle per slot.
    pub arrival_rate: f64,
    /// Task size bounds in bits.
    pub size_min: f64,
    pub size_max: f64,
}

impl Default for ArrivalConfig {
    fn default() -> Self {
        Self {
            arrival_rate: 1.0 / 30.0,
            size_min: 5e5,
            size_max: 6e5,
        }
    }
}

impl ArrivalConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.arrival_rate >= 0.0, "arrival_rate", "must be nonnegative")?;
        ensure(self.size_min > 0.0, "size_min", "must be positive")?;
        ensure(self.size_max >= self.size_min, "size_max", "must be >= size_min")
    }

    /// Expected generated bits per vehicle per slot.
    pub fn mean_bits_per_slot(&self) -> f64 {
        self.arrival_rate * 0.5 * (self.size_min + self.size_max)
    }
}

/// Local CPU model, identical for every vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeParams {
    /// Maximum CPU frequency in cycles/s.
    pub max_freq: f64,
    /// Cycles needed per input bit.
    pub workload: f64,
    /// Effective switched capacitance; `xi f^3 tau` is Joules.
    pub energy_coeff: f64,
}

impl Default for ComputeParams {
    fn default() -> Self {
        Self {
            max_freq: 1e9,
            workload: 40.0,
            energy_coeff: 1e-27,
        }
    }
}

impl ComputeParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.max_freq > 0.0, "max_freq", "must be positive")?;
        ensure(self.workload > 0.0, "workload", "must be positive")?;
        ensure(self.energy_coeff > 0.0, "energy_coeff", "must be positive")
    }
}

/// Backlog of every vehicle at the start of a slot, in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueState {
    pub backlog: Vec<f64>,
    pub slot: u64,
}

impl QueueState {
    pub fn empty(vehicles: usize) -> Self {
        Self {
            backlog: vec![0.0; vehicles],
            slot: 0,
        }
    }

    pub fn total(&self) -> f64 {
        self.backlog.iter().sum()
    }
}

/// Per-vehicle bits moved during one slot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlotFlows {
    pub offload_out: Vec<f64>,
    pub local: Vec<f64>,
    pub received: Vec<f64>,
    pub generated: Vec<f64>,
}

impl SlotFlows {
    pub fn departures(&self, k: usize) -> f64 {
        self.offload_out[k] + self.local[k]
    }

    pub fn arrivals(&self, k: usize) -> f64 {
        self.received[k] + self.generated[k]
    }

    pub fn vehicles(&self) -> usize {
        self.local.len()
    }
}

/// Bits of newly generated tasks for each vehicle: a Poisson number of
/// tasks, each uniformly sized in `[size_min, size_max]`.
pub fn generate_arrivals<R: Rng + ?Sized>(
    cfg: &ArrivalConfig,
    vehicles: usize,
    rng: &mut R,
) -> Vec<f64> {
    let poisson = (cfg.arrival_rate > 0.0).then(|| Poisson::new(cfg.arrival_rate).unwrap());
    (0..vehicles)
        .map(|_| {
            let tasks = poisson.as_ref().map_or(0.0, |d| d.sample(rng)) as u64;
            (0..tasks)
                .map(|_| rng.random_range(cfg.size_min..=cfg.size_max))
                .sum()
        })
        .collect()
}

/// Departures and arrivals implied by a decision. `rates` are the robust
/// rates in bits/s, with a zero diagonal.
pub fn slot_flows(
    decision: &Decision,
    rates: &Square<f64>,
    generated: &[f64],
    compute: &ComputeParams,
    tau: f64,
) -> SlotFlows {
    let k = rates.dim();
    let mut flows = SlotFlows {
        offload_out: vec![0.0; k],
        local: vec![0.0; k],
        received: vec![0.0; k],
        generated: generated.to_vec(),
    };
    for tx in 0..k {
        for rx in 0..k {
            if tx == rx {
                continue;
            }
            let bits = rates[(tx, rx)] * tau;
            flows.offload_out[tx] += bits;
            flows.received[rx] += bits;
        }
        flows.local[tx] = decision.cpu_freq[tx] / compute.workload * tau;
    }
    flows
}

/// `Q(t+1) = max(0, Q(t) - D(t)) + A(t)`.
///
/// Both additions round toward negative infinity, so the stored backlog
/// never exceeds the exact value of the recursion for the given flows.
pub fn update_queue(state: &QueueState, flows: &SlotFlows) -> QueueState {
    let backlog = state
        .backlog
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            let remaining = add_down(q, -flows.departures(k)).max(0.0);
            add_down(remaining, flows.arrivals(k))
        })
        .collect();
    QueueState {
        backlog,
        slot: state.slot + 1,
    }
}

/// Energy drawn in one slot by transmission and local computing.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotEnergy {
    pub per_vehicle: Vec<f64>,
    pub total: f64,
}

/// Energy `xi f^3 tau` of running the CPU at `freq` for one slot.
pub fn compute_energy(freq: f64, compute: &ComputeParams, tau: f64) -> f64 {
    compute.energy_coeff * freq * freq * freq * tau
}

pub fn slot_energy(decision: &Decision, compute: &ComputeParams, tau: f64) -> SlotEnergy {
    let per_vehicle: Vec<f64> = (0..decision.vehicles())
        .map(|k| {
            decision.power.row_sum(k) * tau + compute_energy(decision.cpu_freq[k], compute, tau)
        })
        .collect();
    let total = per_vehicle.iter().sum();
    SlotEnergy { per_vehicle, total }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use proptest::prelude::*;

    fn idle(k: usize) -> Decision {
        Decision::idle(k)
    }

    #[test]
    fn sparse_poisson_arrivals() {
        let cfg = ArrivalConfig::default();
        let mut rng = stream_rng(11, Stream::Arrivals);
        let slots = 100_000;
        let zeros = (0..slots)
            .filter(|_| generate_arrivals(&cfg, 1, &mut rng)[0] == 0.0)
            .count();
        let frac = zeros as f64 / slots as f64;
        assert!((frac - (-1.0f64 / 30.0).exp()).abs() < 0.005, "{frac}");
    }

    #[test]
    fn degenerate_task_size() {
        let cfg = ArrivalConfig {
            arrival_rate: 0.5,
            size_min: 5e5,
            size_max: 5e5,
        };
        let mut rng = stream_rng(12, Stream::Arrivals);
        for _ in 0..2000 {
            let bits = generate_arrivals(&cfg, 1, &mut rng)[0];
            assert_eq!(bits % 5e5, 0.0);
        }
    }

    #[test]
    fn long_run_mean_bits() {
        let cfg = ArrivalConfig::default();
        let mut rng = stream_rng(13, Stream::Arrivals);
        let slots = 1_000_000;
        let sum: f64 = (0..slots / 8)
            .flat_map(|_| generate_arrivals(&cfg, 8, &mut rng))
            .sum();
        let mean = sum / slots as f64;
        let expected = cfg.mean_bits_per_slot();
        assert!((expected - 18_333.333).abs() < 1e-2);
        assert!((mean / expected - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn zero_rate_generates_nothing() {
        let cfg = ArrivalConfig {
            arrival_rate: 0.0,
            ..ArrivalConfig::default()
        };
        let mut rng = stream_rng(14, Stream::Arrivals);
        assert_eq!(generate_arrivals(&cfg, 4, &mut rng), vec![0.0; 4]);
    }

    #[test]
    fn idle_slot_has_no_flows() {
        let flows = slot_flows(&idle(3), &Square::zeros(3), &[0.0; 3], &ComputeParams::default(), 1e-3);
        for k in 0..3 {
            assert_eq!(flows.departures(k), 0.0);
            assert_eq!(flows.arrivals(k), 0.0);
        }
    }

    #[test]
    fn local_departures_at_max_frequency() {
        let mut d = idle(2);
        d.cpu_freq[0] = 1e9;
        let flows = slot_flows(&d, &Square::zeros(2), &[0.0; 2], &ComputeParams::default(), 1e-3);
        assert!((flows.departures(0) - 25_000.0).abs() < 1e-9);
    }

    #[test]
    fn pair_flow_conservation() {
        let mut rates = Square::zeros(2);
        rates[(0, 1)] = 3e6;
        rates[(1, 0)] = 3e6;
        let flows = slot_flows(&idle(2), &rates, &[0.0; 2], &ComputeParams::default(), 1e-3);
        assert_eq!(flows.received[0], flows.offload_out[1]);
        assert_eq!(flows.received[1], flows.offload_out[0]);
    }

    #[test]
    fn queue_update_examples() {
        let flows = |d: f64, a: f64| SlotFlows {
            offload_out: vec![0.0],
            local: vec![d],
            received: vec![0.0],
            generated: vec![a],
        };
        let q = |b: f64| QueueState {
            backlog: vec![b],
            slot: 0,
        };
        assert_eq!(update_queue(&q(100.0), &flows(150.0, 30.0)).backlog[0], 30.0);
        assert_eq!(update_queue(&q(100.0), &flows(40.0, 0.0)).backlog[0], 60.0);
        assert_eq!(update_queue(&q(0.0), &flows(0.0, 5.5e5)).backlog[0], 5.5e5);
        assert_eq!(update_queue(&q(0.0), &flows(0.0, 0.0)).slot, 1);
    }

    #[test]
    fn energy_examples() {
        let params = ComputeParams::default();
        let mut d = idle(2);
        d.cpu_freq[0] = 1e9;
        let e = slot_energy(&d, &params, 1e-3);
        assert!((e.per_vehicle[0] - 1e-3).abs() < 1e-15);
        assert_eq!(slot_energy(&idle(2), &params, 1e-3).total, 0.0);

        let mut d = idle(3);
        let p = crate::units::dbm_to_watts(35.0);
        d.power[(0, 1)] = 0.4 * p;
        d.power[(0, 2)] = 0.6 * p;
        let e = slot_energy(&d, &params, 1e-3);
        assert!((e.total - 3.16e-3).abs() < 3e-6);
    }

    proptest! {
        #[test]
        fn queues_stay_nonnegative_and_bits_are_conserved(
            q in prop::collection::vec(0.0f64..2e6, 4),
            r in prop::collection::vec(0.0f64..5e8, 16),
            f in prop::collection::vec(0.0f64..1e9, 4),
            gen in prop::collection::vec(0.0f64..1e6, 4),
        ) {
            let mut rates = Square::from_fn(4, |a, b| r[a * 4 + b]);
            for k in 0..4 { rates[(k, k)] = 0.0; }
            let mut d = idle(4);
            d.cpu_freq.copy_from_slice(&f);
            let flows = slot_flows(&d, &rates, &gen, &ComputeParams::default(), 1e-3);
            let out: f64 = flows.offload_out.iter().sum();
            let rec: f64 = flows.received.iter().sum();
            prop_assert!((out - rec).abs() <= 1e-9 * out.max(1.0));
            let next = update_queue(&QueueState { backlog: q, slot: 0 }, &flows);
            prop_assert!(next.backlog.iter().all(|&b| b >= 0.0));
        }
    }
}
