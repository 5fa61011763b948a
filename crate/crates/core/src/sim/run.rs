use crate::error::Result;
use crate::geometry::sample_with_distances;
use crate::lyapunov::{
    drift_penalty_objective, lyapunov_bound_check, optimal_cpu_freq, BoundCheck, Decision,
};
use crate::matrix::Square;
use crate::phy::{robust_rate, LinkAllocation};
use crate::queueing::{generate_arrivals, slot_energy, slot_flows, update_queue, QueueState};
use crate::rng::{stream_rng, SimRng, Stream};
use crate::sim::config::RunConfig;
use crate::sim::oma::oma_rate;
use crate::solver::{solve_from_even_start, Access, DcObjective};

/// What happened in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotMetrics {
    /// 1-based slot index.
    pub slot: u64,
    /// Backlog of each vehicle at the start of the slot (bits).
    pub queues: Vec<f64>,
    /// Energy of each vehicle during the slot (J).
    pub energy: Vec<f64>,
    pub energy_total: f64,
    /// Outer BSUM iterations (0 when nothing was solved).
    pub solver_iters: usize,
    pub solver_converged: bool,
    /// Drift-plus-penalty objective of the executed decision.
    pub objective: f64,
    /// Communication part of the objective.
    pub comm_objective: f64,
    /// Running average of the backlog per vehicle over slots `1..=t`.
    pub avg_queue: f64,
    /// Running average of the energy per vehicle over slots `1..=t`.
    pub avg_energy: f64,
    pub bound: BoundCheck,
}

/// Closed-loop slot simulator. Owns the queue state and the random
/// streams of one run.
pub struct Simulation {
    cfg: RunConfig,
    distances: Square<f64>,
    queues: QueueState,
    channel_rng: SimRng,
    arrival_rng: SimRng,
    queue_sum: f64,
    energy_sum: f64,
}

impl Simulation {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let distances = cfg.platoon.distances()?;
        let vehicles = cfg.platoon.vehicle_count;
        Ok(Self {
            distances,
            queues: QueueState::empty(vehicles),
            channel_rng: stream_rng(cfg.seed, Stream::Channel),
            arrival_rng: stream_rng(cfg.seed, Stream::Arrivals),
            queue_sum: 0.0,
            energy_sum: 0.0,
            cfg,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn queues(&self) -> &QueueState {
        &self.queues
    }

    /// Advances one slot: sample the channel and arrivals, decide, move
    /// data and update the queues.
    pub fn step(&mut self) -> Result<SlotMetrics> {
        let cfg = &self.cfg;
        let k = cfg.platoon.vehicle_count;
        let tau = cfg.platoon.slot_duration;
        let slot = self.queues.slot + 1;
        let channel = sample_with_distances(&self.distances, &cfg.channel, slot, &mut self.channel_rng);
        let generated = generate_arrivals(&cfg.arrivals, k, &mut self.arrival_rng);
        let backlog = &self.queues.backlog;

        let mut decision = Decision::idle(k);
        for (f, &q) in decision.cpu_freq.iter_mut().zip(backlog) {
            *f = optimal_cpu_freq(q, cfg.weight, &cfg.compute);
        }
        let mut rates = Square::zeros(k);
        let mut solver_iters = 0;
        let mut solver_converged = true;
        if let Some(access) = cfg.scheme.access() {
            let obj = DcObjective::new(
                access,
                &channel,
                backlog,
                &cfg.radio,
                cfg.channel.est_error_var,
                cfg.weight,
                tau,
            )?;
            if obj.active_senders().next().is_some() {
                let out = solve_from_even_start(&obj, &cfg.solver);
                solver_iters = out.outer_iterations();
                solver_converged = out.converged;
                decision.power = out.power;
                match access {
                    Access::Noma => decision.bandwidth = out.band,
                    Access::Oma => {
                        let pairs = Square::from_fn(k, |a, b| out.band[a * k + b]);
                        decision.bandwidth = (0..k).map(|a| pairs.row_sum(a)).collect();
                        decision.pair_bandwidth = Some(pairs);
                    }
                }
                rates = link_rates(cfg, &channel.est_gain_sq, &decision, access)?;
            }
        }
        decision.audit(
            cfg.radio.max_tx_power,
            cfg.radio.total_bandwidth,
            cfg.compute.max_freq,
            1e-9,
        )?;

        let flows = slot_flows(&decision, &rates, &generated, &cfg.compute, tau);
        let energy = slot_energy(&decision, &cfg.compute, tau);
        let terms = drift_penalty_objective(
            &decision,
            &self.queues,
            &rates,
            &generated,
            &cfg.compute,
            cfg.weight,
            tau,
        )?;
        let next = update_queue(&self.queues, &flows);
        let bound = lyapunov_bound_check(&self.queues, &next, &flows, energy.total, cfg.weight);

        self.queue_sum += backlog.iter().sum::<f64>();
        self.energy_sum += energy.total;
        let denom = slot as f64 * k as f64;
        let metrics = SlotMetrics {
            slot,
            queues: backlog.clone(),
            energy: energy.per_vehicle,
            energy_total: energy.total,
            solver_iters,
            solver_converged,
            objective: terms.total,
            comm_objective: terms.comm_term,
            avg_queue: self.queue_sum / denom,
            avg_energy: self.energy_sum / denom,
            bound,
        };
        self.queues = next;
        Ok(metrics)
    }
}

/// Robust rates of the executed allocation, from the link-level formulas.
fn link_rates(
    cfg: &RunConfig,
    gains: &Square<f64>,
    decision: &Decision,
    access: Access,
) -> Result<Square<f64>> {
    let k = gains.dim();
    let mut rates = Square::zeros(k);
    for tx in 0..k {
        if decision.power.row_sum(tx) <= 0.0 {
            continue;
        }
        match access {
            Access::Noma => {
                let alloc = LinkAllocation {
                    power: decision.power.row(tx).to_vec(),
                    bandwidth: decision.bandwidth[tx],
                };
                for rx in 0..k {
                    if rx != tx && alloc.power[rx] > 0.0 {
                        rates[(tx, rx)] = robust_rate(
                            &alloc,
                            gains.row(tx),
                            &cfg.radio,
                            cfg.channel.est_error_var,
                            rx,
                        )?;
                    }
                }
            }
            Access::Oma => {
                let pairs = decision.pair_bandwidth.as_ref().expect("OMA decision carries pair bands");
                for rx in 0..k {
                    if rx != tx {
                        rates[(tx, rx)] = oma_rate(
                            decision.power[(tx, rx)],
                            pairs[(tx, rx)],
                            gains[(tx, rx)],
                            cfg.channel.est_error_var,
                            cfg.radio.outage_threshold,
                            cfg.radio.noise_psd,
                        )?;
                    }
                }
            }
        }
    }
    Ok(rates)
}

/// Runs `cfg.num_slots` slots and returns every slot's metrics.
pub fn run(cfg: &RunConfig) -> Result<Vec<SlotMetrics>> {
    let mut sim = Simulation::new(cfg.clone())?;
    (0..cfg.num_slots).map(|_| sim.step()).collect()
}

/// Runs and folds each slot into `visit` without keeping the stream.
pub fn run_with<F: FnMut(&SlotMetrics)>(cfg: &RunConfig, mut visit: F) -> Result<()> {
    let mut sim = Simulation::new(cfg.clone())?;
    for _ in 0..cfg.num_slots {
        visit(&sim.step()?);
    }
    Ok(())
}
