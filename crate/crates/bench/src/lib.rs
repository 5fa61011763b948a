//! Fixtures shared by the benchmarks.

use platoon_offload::geometry::sample_channel;
use platoon_offload::{stream_rng, Access, DcObjective, RunConfig, Stream};
use rand::Rng;

/// A Table I slot state with backlogs uniform on `[0, 1.5e6]` bits.
pub fn slot_objective(seed: u64, access: Access) -> DcObjective {
    let cfg = RunConfig::default();
    let mut rng = stream_rng(seed, Stream::Instances);
    let ch = sample_channel(&cfg.platoon, &cfg.channel, 0, &mut rng).expect("default config is valid");
    let q: Vec<f64> = (0..cfg.platoon.vehicle_count)
        .map(|_| rng.random_range(0.0..1.5e6))
        .collect();
    DcObjective::new(access, &ch, &q, &cfg.radio, cfg.channel.est_error_var, cfg.weight, cfg.platoon.slot_duration)
        .expect("default config is valid")
}
