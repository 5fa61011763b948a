use std::fmt;

use rayon::prelude::*;

use crate::error::{ensure, Result};
use crate::sim::config::{RunConfig, SchemeKind};
use crate::sim::metrics::{Summary, SummaryAccumulator};
use crate::sim::run::run_with;
use crate::units::kmh_to_ms;

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Platoon velocity in km/h.
    VelocityKmh,
    /// Energy weight `V`.
    Weight,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::VelocityKmh => "velocity_kmh",
            Axis::Weight => "weight_v",
        }
    }

    /// `base` with the axis set to `value`.
    pub fn apply(self, base: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut cfg = base.clone();
        match self {
            Axis::VelocityKmh => cfg.platoon.velocity = kmh_to_ms(value),
            Axis::Weight => cfg.weight = value,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One simulated (point, scheme, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedResult {
    pub axis_value: f64,
    pub scheme: SchemeKind,
    pub seed: u64,
    pub summary: Summary,
}

/// Seed-mean row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub scheme: SchemeKind,
    pub avg_queue: f64,
    pub avg_energy: f64,
    pub weighted_metric: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
    /// Ordered by point, then scheme, then seed.
    pub per_seed: Vec<SeedResult>,
}

impl SweepTable {
    pub fn row(&self, axis_value: f64, scheme: SchemeKind) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.axis_value == axis_value && r.scheme == scheme)
    }

    /// Seed-mean rows of one scheme, in point order.
    pub fn curve(&self, scheme: SchemeKind) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.scheme == scheme).collect()
    }

    pub fn seed_results(&self, axis_value: f64, scheme: SchemeKind) -> Vec<&SeedResult> {
        self.per_seed
            .iter()
            .filter(|r| r.axis_value == axis_value && r.scheme == scheme)
            .collect()
    }
}

/// Simulates every (point, scheme, seed) combination in parallel and
/// averages over seeds. Output order does not depend on scheduling.
pub fn sweep(
    base: &RunConfig,
    axis: Axis,
    points: &[f64],
    schemes: &[SchemeKind],
    seeds: &[u64],
) -> Result<SweepTable> {
    ensure(!points.is_empty(), "points", "need at least one sweep point")?;
    ensure(!schemes.is_empty(), "schemes", "need at least one scheme")?;
    ensure(!seeds.is_empty(), "seeds", "need at least one seed")?;
    let mut tasks = Vec::with_capacity(points.len() * schemes.len() * seeds.len());
    for &value in points {
        let point_cfg = axis.apply(base, value)?;
        for &scheme in schemes {
            for &seed in seeds {
                let cfg = RunConfig {
                    scheme,
                    seed,
                    ..point_cfg.clone()
                };
                tasks.push((value, cfg));
            }
        }
    }
    let per_seed = tasks
        .into_par_iter()
        .map(|(axis_value, cfg)| {
            let mut acc = SummaryAccumulator::new(cfg.weight);
            run_with(&cfg, |m| acc.push(m))?;
            Ok(SeedResult {
                axis_value,
                scheme: cfg.scheme,
                seed: cfg.seed,
                summary: acc.finish(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = per_seed
        .chunks(seeds.len())
        .map(|cell| {
            let n = cell.len() as f64;
            let mean = |f: fn(&Summary) -> f64| cell.iter().map(|r| f(&r.summary)).sum::<f64>() / n;
            SweepRow {
                axis_value: cell[0].axis_value,
                scheme: cell[0].scheme,
                avg_queue: mean(|s| s.avg_queue),
                avg_energy: mean(|s| s.avg_energy),
                weighted_metric: mean(|s| s.weighted_metric),
                seeds: cell.len(),
            }
        })
        .collect();
    Ok(SweepTable {
        axis,
        rows,
        per_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::metrics::metrics_summary;
    use crate::sim::run::run;

    #[test]
    fn single_point_equals_direct_run() {
        let base = RunConfig {
            num_slots: 200,
            ..RunConfig::default()
        };
        let table = sweep(&base, Axis::VelocityKmh, &[90.0], &[SchemeKind::Noma], &[4]).unwrap();
        let cfg = Axis::VelocityKmh
            .apply(&base, 90.0)
            .unwrap()
            .with_scheme(SchemeKind::Noma);
        let direct = metrics_summary(
            &run(&RunConfig { seed: 4, ..cfg.clone() }).unwrap(),
            cfg.weight,
        );
        let row = &table.rows[0];
        assert_eq!(row.avg_queue, direct.avg_queue);
        assert_eq!(row.avg_energy, direct.avg_energy);
        assert_eq!(row.weighted_metric, direct.weighted_metric);
        assert_eq!(row.seeds, 1);
    }

    #[test]
    fn rejects_velocity_at_limit() {
        let base = RunConfig::default();
        assert!(sweep(&base, Axis::VelocityKmh, &[180.0], &[SchemeKind::Local], &[1]).is_err());
    }
}
