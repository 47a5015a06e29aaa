//! Seeded random streams.
//!
//! Every stochastic routine takes its generator explicitly. Parallel work
//! derives one independent ChaCha stream per task from `(seed, index)`, so the
//! output never depends on how tasks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream number `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream indices at or above this value are reserved for auxiliary work
/// (pilot runs, error-bar replicates) so they never collide with task streams.
pub(crate) const AUX_STREAM_BASE: u64 = 1 << 48;
