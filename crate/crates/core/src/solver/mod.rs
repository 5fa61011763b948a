//! Communication resource allocation: the DC-split objective, its convex
//! surrogates and the BSUM loop.

pub mod bsum;
pub mod dc;
pub mod pgd;
pub mod projection;

pub use bsum::{
    bsum, linearize_power_block, refine_power_block, solve_bandwidth_subproblem, solve_from_even_start,
    solve_power_subproblem, BlockUpdate, BsumOutcome, IterationRecord, PowerSurrogate,
    SolverConfig,
};
pub use dc::{Access, DcObjective, DcSplit};
pub use pgd::{PgdConfig, PgdOutcome};
pub use projection::project_box_capped_simplex;
