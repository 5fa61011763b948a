//! Block successive upper-bound minimization of `O2`.
//!
//! Each outer iteration updates the power row of every active sender in
//! ascending order, minimizing a convex upper bound built by linearizing
//! `F-` at the current point, then minimizes `O2` exactly over the
//! bandwidth block (convex for fixed power). Both steps are solved by
//! projected gradient descent.

use crate::matrix::Square;
use crate::solver::dc::{Access, DcObjective};
use crate::solver::pgd::{minimize, PgdConfig};
use crate::solver::projection::project_in_place;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative change of `O2` between outer iterations that counts as
    /// converged.
    pub stop_tol: f64,
    pub max_outer_iters: usize,
    pub inner: PgdConfig,
    /// Bandwidth floor (Hz) kept on active bands while iterating so that
    /// the logarithms stay finite.
    pub band_floor: f64,
    /// After each surrogate step, descend on the exact block objective.
    pub refine_blocks: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            stop_tol: 1e-3,
            max_outer_iters: 50,
            inner: PgdConfig::default(),
            band_floor: 1.0,
            refine_blocks: true,
        }
    }
}

/// Objective after one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub relative_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsumOutcome {
    pub power: Square<f64>,
    pub band: Vec<f64>,
    /// `O2` of the returned allocation.
    pub objective: f64,
    /// `O2` at the starting point.
    pub initial_objective: f64,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
    /// Number of inner solves that stopped at their iteration cap.
    pub inner_cap_hits: usize,
}

impl BsumOutcome {
    pub fn outer_iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Convex upper bound of `O2` in the power row of sender `k`:
/// `F+` with row `k` free plus the linearization of `F-` at the anchor.
#[derive(Debug, Clone)]
pub struct PowerSurrogate {
    pub sender: usize,
    pub anchor: Vec<f64>,
    pub minus_grad: Vec<f64>,
    /// `F+` of every other sender, constant in this block.
    pub offset: f64,
}

impl PowerSurrogate {
    /// Value and gradient at a full-length row.
    pub fn eval(&self, obj: &DcObjective, band: &[f64], row: &[f64], grad: &mut [f64]) -> f64 {
        let mut value = self.offset + obj.f_plus_grad(self.sender, row, band, grad);
        for &n in obj.targets(self.sender) {
            value += self.minus_grad[n] * (row[n] - self.anchor[n]);
            grad[n] += self.minus_grad[n];
        }
        value
    }

    pub fn value(&self, obj: &DcObjective, band: &[f64], row: &[f64]) -> f64 {
        let mut scratch = vec![0.0; row.len()];
        self.eval(obj, band, row, &mut scratch)
    }
}

pub fn linearize_power_block(
    obj: &DcObjective,
    k: usize,
    power: &Square<f64>,
    band: &[f64],
) -> PowerSurrogate {
    let anchor = power.row(k).to_vec();
    let mut minus_grad = vec![0.0; anchor.len()];
    obj.f_minus_grad(k, &anchor, band, &mut minus_grad);
    let offset = (0..obj.vehicles())
        .filter(|&i| i != k)
        .map(|i| obj.sender_split(i, power.row(i), band).f_plus)
        .sum();
    PowerSurrogate {
        sender: k,
        anchor,
        minus_grad,
        offset,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockUpdate {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub hit_cap: bool,
}

/// Minimizes the surrogate over `{p >= 0, sum p <= P0}` restricted to the
/// sender's unpruned targets. Returns the full-length row.
pub fn solve_power_subproblem(
    obj: &DcObjective,
    surrogate: &PowerSurrogate,
    band: &[f64],
    cfg: &PgdConfig,
) -> BlockUpdate {
    let targets = obj.targets(surrogate.sender);
    if targets.is_empty() {
        return BlockUpdate {
            values: vec![0.0; obj.vehicles()],
            iterations: 0,
            hit_cap: false,
        };
    }
    let start: Vec<f64> = targets.iter().map(|&n| surrogate.anchor[n]).collect();
    let mut row = surrogate.anchor.clone();
    let mut full_grad = vec![0.0; row.len()];
    let cap = obj.max_power();
    let out = minimize(
        &start,
        cap,
        |x, g| {
            for (i, &n) in targets.iter().enumerate() {
                row[n] = x[i];
            }
            let v = surrogate.eval(obj, band, &row, &mut full_grad);
            for (i, &n) in targets.iter().enumerate() {
                g[i] = full_grad[n];
            }
            v
        },
        |x| project_in_place(x, cap, 0.0),
        cfg,
    );
    let mut values = vec![0.0; obj.vehicles()];
    for (i, &n) in targets.iter().enumerate() {
        values[n] = out.x[i];
    }
    BlockUpdate {
        values,
        iterations: out.iterations,
        hit_cap: !out.converged,
    }
}

/// Descends on the exact `O2` contribution of sender `k` from `start`,
/// with the same feasible set as [`solve_power_subproblem`]. The block
/// objective is smooth but in general nonconvex, so this reaches a
/// stationary point of the block, not necessarily its minimum.
pub fn refine_power_block(
    obj: &DcObjective,
    k: usize,
    start: &[f64],
    band: &[f64],
    cfg: &PgdConfig,
) -> BlockUpdate {
    let targets = obj.targets(k);
    if targets.is_empty() {
        return BlockUpdate {
            values: start.to_vec(),
            iterations: 0,
            hit_cap: false,
        };
    }
    let x0: Vec<f64> = targets.iter().map(|&n| start[n]).collect();
    let mut row = start.to_vec();
    let mut plus = vec![0.0; row.len()];
    let mut minus = vec![0.0; row.len()];
    let cap = obj.max_power();
    let out = minimize(
        &x0,
        cap,
        |x, g| {
            for (i, &n) in targets.iter().enumerate() {
                row[n] = x[i];
            }
            obj.f_plus_grad(k, &row, band, &mut plus);
            obj.f_minus_grad(k, &row, band, &mut minus);
            for (i, &n) in targets.iter().enumerate() {
                g[i] = plus[n] + minus[n];
            }
            obj.sender_o2(k, &row, band)
        },
        |x| project_in_place(x, cap, 0.0),
        cfg,
    );
    let mut values = start.to_vec();
    for (i, &n) in targets.iter().enumerate() {
        values[n] = out.x[i];
    }
    BlockUpdate {
        values,
        iterations: out.iterations,
        hit_cap: !out.converged,
    }
}

/// Minimizes `O2(P, .)` over `{w >= floor on active bands, sum w <= W0}`.
pub fn solve_bandwidth_subproblem(
    obj: &DcObjective,
    power: &Square<f64>,
    band: &[f64],
    floor: f64,
    cfg: &PgdConfig,
) -> BlockUpdate {
    let active = obj.active_bands();
    let mut values = vec![0.0; band.len()];
    if active.is_empty() {
        return BlockUpdate {
            values,
            iterations: 0,
            hit_cap: false,
        };
    }
    let cap = obj.total_bandwidth();
    let floor = floor.min(cap / active.len() as f64);
    let mut start: Vec<f64> = active.iter().map(|&b| band[b]).collect();
    project_in_place(&mut start, cap, floor);
    let mut full = band.to_vec();
    let mut full_grad = vec![0.0; band.len()];
    let out = minimize(
        &start,
        cap,
        |x, g| {
            for (i, &b) in active.iter().enumerate() {
                full[b] = x[i];
            }
            let v = obj.band_grad(power, &full, &mut full_grad);
            for (i, &b) in active.iter().enumerate() {
                g[i] = full_grad[b];
            }
            v
        },
        |x| project_in_place(x, cap, floor),
        cfg,
    );
    for (i, &b) in active.iter().enumerate() {
        values[b] = out.x[i];
    }
    BlockUpdate {
        values,
        iterations: out.iterations,
        hit_cap: !out.converged,
    }
}

fn relative_change(previous: f64, current: f64) -> f64 {
    let scale = previous.abs().max(current.abs());
    if scale == 0.0 {
        0.0
    } else {
        (previous - current).abs() / scale
    }
}

/// Runs the block loop from a feasible `(power, band)`.
///
/// Stops once `O2` changes by less than `stop_tol` (relative) between outer
/// iterations. Afterwards, senders left on the bandwidth floor are switched
/// off when that does not increase `O2`, and the all-off allocation is
/// returned if it beats the iterate.
pub fn bsum(obj: &DcObjective, power: Square<f64>, band: Vec<f64>, cfg: &SolverConfig) -> BsumOutcome {
    let mut power = power;
    let mut band = band;
    let senders: Vec<usize> = obj.active_senders().collect();
    let active_bands = obj.active_bands();
    let floor = if active_bands.is_empty() {
        0.0
    } else {
        cfg.band_floor.min(obj.total_bandwidth() / active_bands.len() as f64)
    };
    if !active_bands.is_empty() {
        let mut x: Vec<f64> = active_bands.iter().map(|&b| band[b]).collect();
        project_in_place(&mut x, obj.total_bandwidth(), floor);
        for (i, &b) in active_bands.iter().enumerate() {
            band[b] = x[i];
        }
    }

    let initial_objective = obj.o2(&power, &band);
    let mut current = initial_objective;
    let mut trace = Vec::new();
    let mut converged = senders.is_empty();
    let mut inner_cap_hits = 0;

    if !converged {
        for iteration in 1..=cfg.max_outer_iters {
            let previous = current;
            for &k in &senders {
                let surrogate = linearize_power_block(obj, k, &power, &band);
                let update = solve_power_subproblem(obj, &surrogate, &band, &cfg.inner);
                inner_cap_hits += usize::from(update.hit_cap);
                // Keep the anchor if the inner solve made no progress on the bound.
                if surrogate.value(obj, &band, &update.values) <= surrogate.value(obj, &band, &surrogate.anchor) {
                    power.row_mut(k).copy_from_slice(&update.values);
                }
                if cfg.refine_blocks {
                    let refined = refine_power_block(obj, k, power.row(k), &band, &cfg.inner);
                    inner_cap_hits += usize::from(refined.hit_cap);
                    if obj.sender_o2(k, &refined.values, &band) <= obj.sender_o2(k, power.row(k), &band) {
                        power.row_mut(k).copy_from_slice(&refined.values);
                    }
                }
            }
            let update = solve_bandwidth_subproblem(obj, &power, &band, floor, &cfg.inner);
            inner_cap_hits += usize::from(update.hit_cap);
            if obj.o2(&power, &update.values) <= obj.o2(&power, &band) {
                band = update.values;
            }
            current = obj.o2(&power, &band);
            let change = relative_change(previous, current);
            trace.push(IterationRecord {
                iteration,
                objective: current,
                relative_change: change,
            });
            if change < cfg.stop_tol {
                converged = true;
                break;
            }
        }
    }

    release_idle_senders(obj, &mut power, &mut band, floor);
    let mut objective = obj.o2(&power, &band);
    if objective > 0.0 {
        power = Square::zeros(obj.vehicles());
        band.fill(0.0);
        objective = 0.0;
    }
    BsumOutcome {
        power,
        band,
        objective,
        initial_objective,
        trace,
        converged,
        inner_cap_hits,
    }
}

/// Zeroes the bandwidth of senders without power, and switches off senders
/// whose band sits on the floor when their contribution is not negative.
fn release_idle_senders(obj: &DcObjective, power: &mut Square<f64>, band: &mut [f64], floor: f64) {
    for k in 0..obj.vehicles() {
        let targets = obj.targets(k);
        if targets.is_empty() {
            continue;
        }
        let idle = power.row_sum(k) <= 0.0;
        let starved = targets
            .iter()
            .all(|&n| band[obj.band_index(k, n)] <= floor * (1.0 + 1e-9));
        if idle || (starved && obj.sender_o2(k, power.row(k), band) >= 0.0) {
            for &n in targets {
                power[(k, n)] = 0.0;
                band[obj.band_index(k, n)] = 0.0;
            }
        } else if obj.access() == Access::Oma {
            for &n in targets {
                if power[(k, n)] <= 0.0 {
                    band[obj.band_index(k, n)] = 0.0;
                }
            }
        }
    }
}

/// Convenience: BSUM from the spread-evenly starting point.
pub fn solve_from_even_start(obj: &DcObjective, cfg: &SolverConfig) -> BsumOutcome {
    let (power, band) = obj.even_start();
    bsum(obj, power, band, cfg)
}
