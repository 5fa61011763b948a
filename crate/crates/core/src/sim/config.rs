use std::fmt;
use std::str::FromStr;

use crate::error::{ensure, invalid, Error, Result};
use crate::geometry::{ChannelParams, PlatoonConfig};
use crate::phy::RadioParams;
use crate::queueing::{ArrivalConfig, ComputeParams};
use crate::solver::{Access, SolverConfig};

/// Offloading scheme under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Noma,
    Oma,
    Local,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::Noma, SchemeKind::Oma, SchemeKind::Local];

    pub fn access(self) -> Option<Access> {
        match self {
            SchemeKind::Noma => Some(Access::Noma),
            SchemeKind::Oma => Some(Access::Oma),
            SchemeKind::Local => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Noma => "noma",
            SchemeKind::Oma => "oma",
            SchemeKind::Local => "local",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noma" => Ok(SchemeKind::Noma),
            "oma" => Ok(SchemeKind::Oma),
            "local" => Ok(SchemeKind::Local),
            other => Err(invalid("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

/// Everything needed to reproduce one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub platoon: PlatoonConfig,
    pub channel: ChannelParams,
    pub radio: RadioParams,
    pub arrivals: ArrivalConfig,
    pub compute: ComputeParams,
    /// Energy weight `V` of the drift-plus-penalty objective.
    pub weight: f64,
    pub scheme: SchemeKind,
    pub num_slots: u64,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            platoon: PlatoonConfig::default(),
            channel: ChannelParams::default(),
            radio: RadioParams::default(),
            arrivals: ArrivalConfig::default(),
            compute: ComputeParams::default(),
            weight: 1e12,
            scheme: SchemeKind::Noma,
            num_slots: 100_000,
            seed: 1,
            solver: SolverConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.platoon.validate()?;
        self.channel.validate()?;
        self.radio.validate()?;
        self.arrivals.validate()?;
        self.compute.validate()?;
        ensure(self.weight > 0.0, "weight", "must be positive")?;
        ensure(self.solver.stop_tol > 0.0, "stop_tol", "must be positive")?;
        ensure(self.solver.max_outer_iters >= 1, "max_outer_iters", "must be at least 1")?;
        ensure(self.solver.inner.max_iters >= 1, "inner_max_iters", "must be at least 1")
    }

    pub fn with_scheme(&self, scheme: SchemeKind) -> Self {
        Self {
            scheme,
            ..self.clone()
        }
    }
}
