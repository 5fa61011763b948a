//! Experiment commands. Each writes one CSV table to `out`.

use std::io::Write;

use platoon_offload::geometry::sample_channel;
use platoon_offload::phy::{outage_oracle, robust_rate, LinkAllocation};
use platoon_offload::sim::{run_with, sweep, Axis, RunConfig, SchemeKind, SummaryAccumulator};
use platoon_offload::solver::{solve_from_even_start, DcObjective};
use platoon_offload::{stream_rng, Access, Stream};
use rand::Rng;

use crate::error::CliResult;

/// Floats in every table: 9 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(out)
}

/// Per-slot trace of one run. With `per_vehicle`, one row per vehicle
/// and slot; otherwise one row per slot with platoon means (`vehicle` =
/// `all`).
pub fn run<W: Write>(cfg: &RunConfig, per_vehicle: bool, out: W) -> CliResult<()> {
    let mut w = writer(out);
    w.write_record([
        "slot",
        "vehicle",
        "queue_bits",
        "energy_j",
        "avg_queue_bits",
        "avg_energy_j",
        "solver_iters",
        "objective",
    ])?;
    let mut failure = None;
    run_with(cfg, |m| {
        if failure.is_some() {
            return;
        }
        let slot = m.slot.to_string();
        let iters = m.solver_iters.to_string();
        let tail = [fmt_float(m.avg_queue), fmt_float(m.avg_energy), iters, fmt_float(m.objective)];
        let result = if per_vehicle {
            m.queues.iter().zip(&m.energy).enumerate().try_for_each(|(k, (q, e))| {
                let head = [slot.clone(), (k + 1).to_string(), fmt_float(*q), fmt_float(*e)];
                w.write_record(head.iter().chain(&tail))
            })
        } else {
            let k = m.queues.len() as f64;
            let q = m.queues.iter().sum::<f64>() / k;
            let head = [slot, "all".to_string(), fmt_float(q), fmt_float(m.energy_total / k)];
            w.write_record(head.iter().chain(&tail))
        };
        if let Err(e) = result {
            failure = Some(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Seed-mean summary per sweep point and scheme.
pub fn sweep_table<W: Write>(
    cfg: &RunConfig,
    axis: Axis,
    points: &[f64],
    schemes: &[SchemeKind],
    seeds: &[u64],
    out: W,
) -> CliResult<()> {
    let table = sweep(cfg, axis, points, schemes, seeds)?;
    let mut w = writer(out);
    w.write_record(["axis_value", "scheme", "avg_queue_bits", "avg_energy_j", "weighted_metric", "seeds"])?;
    for r in &table.rows {
        w.write_record([
            fmt_float(r.axis_value),
            r.scheme.to_string(),
            fmt_float(r.avg_queue),
            fmt_float(r.avg_energy),
            fmt_float(r.weighted_metric),
            r.seeds.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Queue bound of the representative slot state.
pub const CONVERGENCE_QUEUE_MAX: f64 = 1.5e6;

/// One seeded slot state: a channel at the configured velocity and
/// backlogs uniform on `[0, 1.5e6]` bits.
pub fn representative_state(cfg: &RunConfig) -> CliResult<(platoon_offload::ChannelRealization, Vec<f64>)> {
    let mut rng = stream_rng(cfg.seed, Stream::Instances);
    let ch = sample_channel(&cfg.platoon, &cfg.channel, 0, &mut rng)?;
    let q = (0..cfg.platoon.vehicle_count)
        .map(|_| rng.random_range(0.0..=CONVERGENCE_QUEUE_MAX))
        .collect();
    Ok((ch, q))
}

/// BSUM objective trace for each weight from the same slot state.
/// Row 0 is the starting point; shorter traces leave trailing cells empty.
pub fn convergence<W: Write>(cfg: &RunConfig, weights: &[f64], out: W) -> CliResult<()> {
    let access = cfg.scheme.access().unwrap_or(Access::Noma);
    let (ch, q) = representative_state(cfg)?;
    let mut traces = Vec::with_capacity(weights.len());
    for &v in weights {
        let obj = DcObjective::new(access, &ch, &q, &cfg.radio, cfg.channel.est_error_var, v, cfg.platoon.slot_duration)?;
        let outcome = solve_from_even_start(&obj, &cfg.solver);
        let mut trace = vec![outcome.initial_objective];
        trace.extend(outcome.trace.iter().map(|r| r.objective));
        traces.push(trace);
    }
    let mut w = writer(out);
    let mut header = vec!["iteration".to_string()];
    header.extend(weights.iter().map(|v| format!("o2_v={v:e}")));
    w.write_record(&header)?;
    let rows = traces.iter().map(Vec::len).max().unwrap_or(0);
    for i in 0..rows {
        let mut record = vec![i.to_string()];
        record.extend(traces.iter().map(|t| t.get(i).map(|&x| fmt_float(x)).unwrap_or_default()));
        w.write_record(&record)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Monte Carlo outage probability of the robust rate on random feasible
/// allocations.
pub fn outage_check<W: Write>(cfg: &RunConfig, instances: usize, draws: usize, out: W) -> CliResult<()> {
    let mut rng = stream_rng(cfg.seed, Stream::Oracle);
    let k = cfg.platoon.vehicle_count;
    let mut w = writer(out);
    w.write_record(["instance", "sender", "target", "robust_rate_bps", "outage_probability", "eta0"])?;
    for i in 0..instances {
        let ch = sample_channel(&cfg.platoon, &cfg.channel, i as u64, &mut rng)?;
        let alloc = random_allocation(cfg, &mut rng);
        let sender = rng.random_range(0..k);
        let mut target = rng.random_range(0..k - 1);
        if target >= sender {
            target += 1;
        }
        let mut alloc = alloc;
        alloc.power[sender] = 0.0;
        if alloc.power[target] == 0.0 {
            alloc.power[target] = 0.1 * cfg.radio.max_tx_power;
        }
        let gains = ch.gain_row(sender);
        let rate = robust_rate(&alloc, gains, &cfg.radio, cfg.channel.est_error_var, target)?;
        let p = outage_oracle(&alloc, gains, &cfg.radio, cfg.channel.est_error_var, target, draws, &mut rng)?;
        w.write_record([
            (i + 1).to_string(),
            (sender + 1).to_string(),
            (target + 1).to_string(),
            fmt_float(rate),
            fmt_float(p),
            fmt_float(cfg.radio.outage_threshold),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Random power split over all nodes (within `P0`) and a random band
/// (within `W0`).
pub fn random_allocation<R: Rng + ?Sized>(cfg: &RunConfig, rng: &mut R) -> LinkAllocation {
    let k = cfg.platoon.vehicle_count;
    let shares: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    let scale = rng.random_range(0.05..=1.0) * cfg.radio.max_tx_power / shares.iter().sum::<f64>();
    LinkAllocation {
        power: shares.iter().map(|s| s * scale).collect(),
        bandwidth: rng.random_range(0.01..=1.0) * cfg.radio.total_bandwidth,
    }
}

/// Empirical distribution of per-vehicle, per-slot queue lengths.
pub fn distribution<W: Write>(cfg: &RunConfig, schemes: &[SchemeKind], bin_width: f64, out: W) -> CliResult<()> {
    let mut w = writer(out);
    w.write_record(["scheme", "bin_lower_bits", "bin_upper_bits", "fraction"])?;
    for &scheme in schemes {
        let run_cfg = cfg.with_scheme(scheme);
        let mut acc = SummaryAccumulator::with_bin_width(run_cfg.weight, bin_width);
        run_with(&run_cfg, |m| acc.push(m))?;
        for (lo, hi, frac) in acc.finish().histogram.bins() {
            w.write_record([scheme.to_string(), fmt_float(lo), fmt_float(hi), fmt_float(frac)])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
