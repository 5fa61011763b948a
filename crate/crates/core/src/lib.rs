//! Cooperative computation offloading in a vehicular platoon.
//!
//! Vehicles share task backlogs over NOMA links. Each slot a
//! drift-plus-penalty scheduler picks CPU frequencies in closed form and
//! transmit powers and bandwidths with a BSUM solver.

pub mod error;
mod exact;
pub mod geometry;
pub mod lyapunov;
pub mod matrix;
pub mod phy;
pub mod queueing;
pub mod rng;
pub mod sim;
pub mod solver;
pub mod units;

pub use error::{Error, Result};
pub use geometry::{
    idm_spacing, sample_channel, sample_with_distances, ChannelParams, ChannelRealization,
    PlatoonConfig, DEFAULT_EST_ERROR_VAR,
};
pub use lyapunov::{
    drift_penalty_objective, lyapunov_bound_check, optimal_cpu_freq, prune_links, BoundCheck,
    Decision, DriftPenaltyTerms,
};
pub use matrix::Square;
pub use phy::{achievable_rate, outage_oracle, robust_rate, LinkAllocation, RadioParams};
pub use queueing::{
    compute_energy, generate_arrivals, slot_energy, slot_flows, update_queue, ArrivalConfig, ComputeParams,
    QueueState, SlotEnergy, SlotFlows,
};
pub use rng::{stream_rng, SimRng, Stream};
pub use sim::{RunConfig, SchemeKind};
pub use solver::{Access, DcObjective, SolverConfig};
