//! Closed-loop slot simulation, summaries and parameter sweeps.

pub mod config;
pub mod metrics;
pub mod oma;
pub mod run;
pub mod sweep;

pub use config::{RunConfig, SchemeKind};
pub use metrics::{metrics_summary, QueueHistogram, Summary, SummaryAccumulator};
pub use oma::oma_rate;
pub use run::{run, run_with, Simulation, SlotMetrics};
pub use sweep::{sweep, Axis, SeedResult, SweepRow, SweepTable};
