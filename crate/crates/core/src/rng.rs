//! Seeded random streams.
//!
//! One master seed fans out into independent ChaCha streams, one per
//! concern, so that different schemes simulated from the same seed see
//! identical channel and arrival draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream identifiers for the per-concern generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Channel = 1,
    Arrivals = 2,
    Oracle = 3,
    Instances = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
