//! Flat `key = value` configuration in interface units.
//!
//! Resolution order, later wins: built-in defaults, config file,
//! `OFFLOAD_SIM_SEED`, command-line flags.

use std::fmt::Write as _;
use std::path::Path;

use platoon_offload::geometry::{ChannelParams, PlatoonConfig};
use platoon_offload::phy::RadioParams;
use platoon_offload::queueing::{ArrivalConfig, ComputeParams};
use platoon_offload::sim::{RunConfig, SchemeKind};
use platoon_offload::solver::{PgdConfig, SolverConfig};
use platoon_offload::units::{db_to_linear, dbm_to_watts, kmh_to_ms};
use platoon_offload::DEFAULT_EST_ERROR_VAR;

use crate::error::{CliError, CliResult};

pub const SEED_ENV: &str = "OFFLOAD_SIM_SEED";

/// Every tunable of a run, in the units used on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub vehicles: usize,
    pub velocity_kmh: f64,
    pub max_speed_kmh: f64,
    pub min_spacing_m: f64,
    pub time_headway_s: f64,
    pub slot_s: f64,
    pub max_tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub outage_threshold: f64,
    pub arrival_rate: f64,
    pub task_bits_min: f64,
    pub task_bits_max: f64,
    pub max_cpu_hz: f64,
    pub cycles_per_bit: f64,
    pub energy_coeff: f64,
    pub pathloss_db: f64,
    pub pathloss_exponent: f64,
    pub est_error_var: f64,
    pub weight_v: f64,
    pub scheme: SchemeKind,
    pub slots: u64,
    pub seed: u64,
    pub stop_tol: f64,
    pub max_outer_iters: usize,
    pub inner_max_iters: usize,
    pub refine_blocks: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            vehicles: 8,
            velocity_kmh: 108.0,
            max_speed_kmh: 180.0,
            min_spacing_m: 3.0,
            time_headway_s: 1.5,
            slot_s: 1e-3,
            max_tx_power_dbm: 35.0,
            bandwidth_hz: 20e6,
            noise_psd_dbm_hz: -174.0,
            outage_threshold: 0.1,
            arrival_rate: 1.0 / 30.0,
            task_bits_min: 5e5,
            task_bits_max: 6e5,
            max_cpu_hz: 1e9,
            cycles_per_bit: 40.0,
            energy_coeff: 1e-27,
            pathloss_db: -31.5,
            pathloss_exponent: 2.0,
            est_error_var: DEFAULT_EST_ERROR_VAR,
            weight_v: 1e12,
            scheme: SchemeKind::Noma,
            slots: 100_000,
            seed: 1,
            stop_tol: 1e-3,
            max_outer_iters: 50,
            inner_max_iters: 200,
            refine_blocks: true,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{value}`")))
}

impl Settings {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        match key.trim() {
            "vehicles" => self.vehicles = num(key, v)?,
            "velocity_kmh" => self.velocity_kmh = num(key, v)?,
            "max_speed_kmh" => self.max_speed_kmh = num(key, v)?,
            "min_spacing_m" => self.min_spacing_m = num(key, v)?,
            "time_headway_s" => self.time_headway_s = num(key, v)?,
            "slot_s" => self.slot_s = num(key, v)?,
            "max_tx_power_dbm" => self.max_tx_power_dbm = num(key, v)?,
            "bandwidth_hz" => self.bandwidth_hz = num(key, v)?,
            "noise_psd_dbm_hz" => self.noise_psd_dbm_hz = num(key, v)?,
            "outage_threshold" => self.outage_threshold = num(key, v)?,
            "arrival_rate" => self.arrival_rate = num(key, v)?,
            "task_bits_min" => self.task_bits_min = num(key, v)?,
            "task_bits_max" => self.task_bits_max = num(key, v)?,
            "max_cpu_hz" => self.max_cpu_hz = num(key, v)?,
            "cycles_per_bit" => self.cycles_per_bit = num(key, v)?,
            "energy_coeff" => self.energy_coeff = num(key, v)?,
            "pathloss_db" => self.pathloss_db = num(key, v)?,
            "pathloss_exponent" => self.pathloss_exponent = num(key, v)?,
            "est_error_var" => self.est_error_var = num(key, v)?,
            "weight_v" => self.weight_v = num(key, v)?,
            "scheme" => {
                self.scheme = v
                    .parse()
                    .map_err(|e: platoon_offload::Error| CliError::Config(e.to_string()))?
            }
            "slots" => self.slots = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "stop_tol" => self.stop_tol = num(key, v)?,
            "max_outer_iters" => self.max_outer_iters = num(key, v)?,
            "inner_max_iters" => self.inner_max_iters = num(key, v)?,
            "refine_blocks" => self.refine_blocks = num(key, v)?,
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// `(key, value)` pairs in file order. Floats use the shortest text
    /// that parses back to the same value.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |x: f64| format!("{x:?}");
        vec![
            ("vehicles", self.vehicles.to_string()),
            ("velocity_kmh", f(self.velocity_kmh)),
            ("max_speed_kmh", f(self.max_speed_kmh)),
            ("min_spacing_m", f(self.min_spacing_m)),
            ("time_headway_s", f(self.time_headway_s)),
            ("slot_s", f(self.slot_s)),
            ("max_tx_power_dbm", f(self.max_tx_power_dbm)),
            ("bandwidth_hz", f(self.bandwidth_hz)),
            ("noise_psd_dbm_hz", f(self.noise_psd_dbm_hz)),
            ("outage_threshold", f(self.outage_threshold)),
            ("arrival_rate", f(self.arrival_rate)),
            ("task_bits_min", f(self.task_bits_min)),
            ("task_bits_max", f(self.task_bits_max)),
            ("max_cpu_hz", f(self.max_cpu_hz)),
            ("cycles_per_bit", f(self.cycles_per_bit)),
            ("energy_coeff", f(self.energy_coeff)),
            ("pathloss_db", f(self.pathloss_db)),
            ("pathloss_exponent", f(self.pathloss_exponent)),
            ("est_error_var", f(self.est_error_var)),
            ("weight_v", f(self.weight_v)),
            ("scheme", self.scheme.to_string()),
            ("slots", self.slots.to_string()),
            ("seed", self.seed.to_string()),
            ("stop_tol", f(self.stop_tol)),
            ("max_outer_iters", self.max_outer_iters.to_string()),
            ("inner_max_iters", self.inner_max_iters.to_string()),
            ("refine_blocks", self.refine_blocks.to_string()),
        ]
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and text
    /// after `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(key, value)
                .map_err(|e| CliError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut s = Self::default();
        s.apply_text(text)?;
        Ok(s)
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Applies the seed override from the environment, if set.
    pub fn apply_env_seed(&mut self, value: Option<&str>) -> CliResult<()> {
        match value {
            Some(v) => self
                .set("seed", v)
                .map_err(|_| CliError::Config(format!("{SEED_ENV}: cannot parse `{v}`"))),
            None => Ok(()),
        }
    }

    /// Converts to SI units and validates every invariant.
    pub fn to_run_config(&self) -> CliResult<RunConfig> {
        if self.velocity_kmh >= self.max_speed_kmh {
            return Err(CliError::Config(format!(
                "velocity_kmh = {} must be below max_speed_kmh = {}",
                self.velocity_kmh, self.max_speed_kmh
            )));
        }
        let cfg = RunConfig {
            platoon: PlatoonConfig {
                vehicle_count: self.vehicles,
                velocity: kmh_to_ms(self.velocity_kmh),
                min_spacing: self.min_spacing_m,
                time_headway: self.time_headway_s,
                max_speed: kmh_to_ms(self.max_speed_kmh),
                slot_duration: self.slot_s,
            },
            channel: ChannelParams {
                pathloss_factor: db_to_linear(self.pathloss_db),
                pathloss_exponent: self.pathloss_exponent,
                est_error_var: self.est_error_var,
            },
            radio: RadioParams {
                noise_psd: dbm_to_watts(self.noise_psd_dbm_hz),
                total_bandwidth: self.bandwidth_hz,
                max_tx_power: dbm_to_watts(self.max_tx_power_dbm),
                outage_threshold: self.outage_threshold,
            },
            arrivals: ArrivalConfig {
                arrival_rate: self.arrival_rate,
                size_min: self.task_bits_min,
                size_max: self.task_bits_max,
            },
            compute: ComputeParams {
                max_freq: self.max_cpu_hz,
                workload: self.cycles_per_bit,
                energy_coeff: self.energy_coeff,
            },
            weight: self.weight_v,
            scheme: self.scheme,
            num_slots: self.slots,
            seed: self.seed,
            solver: SolverConfig {
                stop_tol: self.stop_tol,
                max_outer_iters: self.max_outer_iters,
                inner: PgdConfig {
                    max_iters: self.inner_max_iters,
                    ..PgdConfig::default()
                },
                refine_blocks: self.refine_blocks,
                ..SolverConfig::default()
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
