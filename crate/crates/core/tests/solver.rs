use platoon_offload::geometry::sample_channel;
use platoon_offload::solver::{
    bsum, linearize_power_block, solve_bandwidth_subproblem, solve_from_even_start,
    solve_power_subproblem, PgdConfig,
};
use platoon_offload::*;
use rand::Rng;

fn channel(gains: Square<f64>) -> ChannelRealization {
    let k = gains.dim();
    ChannelRealization {
        est_gain_sq: gains,
        distances: Square::zeros(k),
        slot_index: 0,
    }
}

fn radio(noise: f64, band: f64, power: f64) -> RadioParams {
    RadioParams {
        noise_psd: noise,
        total_bandwidth: band,
        max_tx_power: power,
        outage_threshold: 0.1,
    }
}

fn table_instance(seed: u64, access: Access, queue_cap: f64) -> DcObjective {
    let cfg = RunConfig::default();
    let mut rng = stream_rng(seed, Stream::Instances);
    let ch = sample_channel(&cfg.platoon, &cfg.channel, 0, &mut rng).unwrap();
    let q: Vec<f64> = (0..cfg.platoon.vehicle_count)
        .map(|_| rng.random_range(0.0..queue_cap))
        .collect();
    DcObjective::new(access, &ch, &q, &cfg.radio, cfg.channel.est_error_var, cfg.weight, 1e-3).unwrap()
}

/// Single link 0 -> 1 with unit noise, gain and band, no estimation error.
/// `O2(p) = -tau a log2(1 + p) + V tau p`, minimized at `p = a / (V ln 2) - 1`.
fn single_link(a: f64, weight: f64) -> DcObjective {
    let gains = Square::from_fn(2, |i, j| if i == j { 0.0 } else { 1.0 });
    DcObjective::new(Access::Noma, &channel(gains), &[a, 0.0], &radio(1.0, 1.0, 1.0), 0.0, weight, 1.0).unwrap()
}

#[test]
fn pruned_sender_stays_silent() {
    let obj = table_instance(3, Access::Noma, 1.5e6);
    let (power, band) = obj.even_start();
    let idle: Vec<usize> = (0..obj.vehicles()).filter(|&k| obj.targets(k).is_empty()).collect();
    assert!(!idle.is_empty());
    for k in idle {
        let s = linearize_power_block(&obj, k, &power, &band);
        let out = solve_power_subproblem(&obj, &s, &band, &PgdConfig::default());
        assert!(out.values.iter().all(|&p| p == 0.0));
        assert_eq!(out.iterations, 0);
    }
}

#[test]
fn interior_power_optimum() {
    let a = 1e3;
    let weight = a / (1.3 * std::f64::consts::LN_2);
    let obj = single_link(a, weight);
    let mut power = Square::zeros(2);
    power[(0, 1)] = 0.9;
    let band = vec![1.0, 0.0];
    let s = linearize_power_block(&obj, 0, &power, &band);
    let out = solve_power_subproblem(&obj, &s, &band, &PgdConfig::default());
    assert!((out.values[1] - 0.3).abs() < 1e-6, "{}", out.values[1]);
    let mut grad = vec![0.0; 2];
    s.eval(&obj, &band, &out.values, &mut grad);
    assert!(grad[1].abs() <= 1e-6 * weight);
}

#[test]
fn power_subproblem_matches_grid() {
    // Sender 0 with two targets sharing its band.
    let mut gains = Square::zeros(3);
    gains[(0, 1)] = 2.0;
    gains[(0, 2)] = 0.7;
    gains[(1, 0)] = 2.0;
    gains[(2, 0)] = 0.7;
    gains[(1, 2)] = 1.0;
    gains[(2, 1)] = 1.0;
    for (q, var, weight) in [([8.0, 3.0, 0.0], 0.05, 2.0), ([5.0, 0.0, 4.0], 0.2, 1.0), ([9.0, 1.0, 2.0], 0.0, 3.0)] {
        let obj = DcObjective::new(Access::Noma, &channel(gains.clone()), &q, &radio(0.5, 1.0, 1.0), var, weight, 1.0).unwrap();
        let (power, band) = obj.even_start();
        let s = linearize_power_block(&obj, 0, &power, &band);
        let out = solve_power_subproblem(&obj, &s, &band, &PgdConfig::default());
        let got = s.value(&obj, &band, &out.values);
        let steps = 200;
        let mut best = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let row = [0.0, i as f64 / steps as f64, j as f64 / steps as f64];
                best = best.min(s.value(&obj, &band, &row));
            }
        }
        assert!(got <= best + 1e-3 * best.abs(), "{got} vs grid {best}");
        assert!(out.values[1] + out.values[2] <= 1.0 + 1e-12);
    }
}

#[test]
fn surrogate_touches_and_bounds() {
    let mut rng = stream_rng(17, Stream::Instances);
    for seed in 0..10 {
        let obj = table_instance(seed, Access::Noma, 1.5e6);
        let (mut power, band) = obj.even_start();
        for k in obj.active_senders().collect::<Vec<_>>() {
            for &n in obj.targets(k) {
                power[(k, n)] *= rng.random_range(0.1..1.0);
            }
        }
        let total = obj.dc_split_eval(&power, &band).unwrap();
        for k in obj.active_senders().collect::<Vec<_>>() {
            let s = linearize_power_block(&obj, k, &power, &band);
            let at_anchor = s.value(&obj, &band, power.row(k));
            assert!((at_anchor - total.f_plus).abs() <= 1e-12 * total.f_plus.abs());

            // Block gradient of the surrogate equals that of O2 at the anchor.
            let mut grad = vec![0.0; obj.vehicles()];
            s.eval(&obj, &band, power.row(k), &mut grad);
            for &n in obj.targets(k) {
                let h = 1e-6 * power[(k, n)];
                let mut up = power.clone();
                let mut dn = power.clone();
                up[(k, n)] += h;
                dn[(k, n)] -= h;
                let fd = (obj.o2(&up, &band) - obj.o2(&dn, &band)) / (2.0 * h);
                assert!((grad[n] - fd).abs() <= 1e-4 * grad[n].abs().max(fd.abs()), "{} vs {fd}", grad[n]);
            }

            // Upper bound on the block restriction, up to the constant F-.
            for _ in 0..100 {
                let mut trial = power.clone();
                let shares: Vec<f64> = obj.targets(k).iter().map(|_| rng.random::<f64>()).collect();
                let scale = rng.random::<f64>() * obj.max_power() / shares.iter().sum::<f64>();
                for (&n, w) in obj.targets(k).iter().zip(&shares) {
                    trial[(k, n)] = w * scale;
                }
                let bound = s.value(&obj, &band, trial.row(k)) + total.f_minus;
                let exact = obj.o2(&trial, &band);
                assert!(exact <= bound + 1e-9 * bound.abs());
            }
        }
    }
}

#[test]
fn lone_sender_takes_all_bandwidth() {
    let obj = single_link(1e3, 1.0);
    let mut power = Square::zeros(2);
    power[(0, 1)] = 0.5;
    let out = solve_bandwidth_subproblem(&obj, &power, &[0.3, 0.0], 1e-6, &PgdConfig::default());
    assert!((out.values[0] - 1.0).abs() < 1e-9);
    assert_eq!(out.values[1], 0.0);
}

#[test]
fn symmetric_senders_split_evenly() {
    // Vehicles 0 and 2 both hold data for 1 and 3 over mirrored channels.
    let mut gains = Square::zeros(4);
    for (a, b, g) in [(0, 1, 3.0), (2, 3, 3.0), (0, 3, 1.0), (2, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0)] {
        gains[(a, b)] = g;
        gains[(b, a)] = g;
    }
    let q = [5.0, 0.0, 5.0, 0.0];
    let obj = DcObjective::new(Access::Noma, &channel(gains), &q, &radio(1.0, 10.0, 1.0), 0.0, 0.1, 1.0).unwrap();
    let mut power = Square::zeros(4);
    for k in [0, 2] {
        for &n in obj.targets(k) {
            power[(k, n)] = 0.4;
        }
    }
    let out = solve_bandwidth_subproblem(&obj, &power, &[9.0, 0.0, 1.0, 0.0], 1e-6, &PgdConfig::default());
    assert!((out.values[0] - out.values[2]).abs() <= 1e-3 * out.values[0]);
    assert!((out.values[0] + out.values[2] - 10.0).abs() < 1e-6);
}

#[test]
fn stationary_start_stops_after_one_iteration() {
    let a = 1e3;
    let weight = a / (1.3 * std::f64::consts::LN_2);
    let obj = single_link(a, weight);
    let mut power = Square::zeros(2);
    power[(0, 1)] = 0.3;
    let out = bsum(&obj, power, vec![1.0, 0.0], &SolverConfig::default());
    assert_eq!(out.outer_iterations(), 1);
    assert!(out.converged);
    assert!((out.power[(0, 1)] - 0.3).abs() < 1e-6);
}

#[test]
fn outer_trace_never_increases() {
    let cfg = SolverConfig::default();
    for seed in 0..100 {
        let access = if seed % 2 == 0 { Access::Noma } else { Access::Oma };
        let obj = table_instance(seed, access, 1.5e6);
        let out = solve_from_even_start(&obj, &cfg);
        let mut previous = out.initial_objective;
        for r in &out.trace {
            assert!(r.objective <= previous + 1e-9 * previous.abs(), "seed {seed}: {} after {previous}", r.objective);
            previous = r.objective;
        }
        assert!(out.objective <= 0.0);
        assert!(out.objective <= previous + 1e-9 * previous.abs());
    }
}

#[test]
fn iterates_stay_feasible() {
    let cfg = SolverConfig::default();
    for seed in 0..20 {
        for access in [Access::Noma, Access::Oma] {
            let obj = table_instance(seed, access, 1.5e6);
            let out = solve_from_even_start(&obj, &cfg);
            for k in 0..obj.vehicles() {
                assert!(out.power.row_sum(k) <= obj.max_power() * (1.0 + 1e-12));
                for n in 0..obj.vehicles() {
                    let p = out.power[(k, n)];
                    assert!(p >= 0.0);
                    if !obj.targets(k).contains(&n) {
                        assert_eq!(p, 0.0);
                    }
                }
            }
            assert!(out.band.iter().all(|&w| w >= 0.0));
            assert!(out.band.iter().sum::<f64>() <= obj.total_bandwidth() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn two_vehicle_solution_beats_grid() {
    let cfg = RunConfig::default();
    let platoon = PlatoonConfig {
        vehicle_count: 2,
        ..cfg.platoon
    };
    let mut rng = stream_rng(23, Stream::Instances);
    for _ in 0..10 {
        let ch = sample_channel(&platoon, &cfg.channel, 0, &mut rng).unwrap();
        let q = [rng.random_range(0.0..1.5e6), rng.random_range(0.0..1.5e6)];
        let obj = DcObjective::new(Access::Noma, &ch, &q, &cfg.radio, cfg.channel.est_error_var, cfg.weight, 1e-3).unwrap();
        let out = solve_from_even_start(&obj, &cfg.solver);
        let (k, n) = if q[0] > q[1] { (0, 1) } else { (1, 0) };
        let mut best: f64 = 0.0;
        for i in 0..=400 {
            for j in 1..=100 {
                let mut p = Square::zeros(2);
                p[(k, n)] = obj.max_power() * i as f64 / 400.0;
                let mut w = vec![0.0; 2];
                w[k] = obj.total_bandwidth() * j as f64 / 100.0;
                best = best.min(obj.o2(&p, &w));
            }
        }
        assert!(out.objective <= best + 1e-2 * best.abs(), "{} vs {best}", out.objective);
    }
}
