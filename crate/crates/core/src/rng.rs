//! Seeded random streams.
//!
//! All randomness comes from ChaCha20 keyed by the run seed. Independent
//! consumers get independent streams selected by `(step, column)`, so adding or
//! reordering one consumer never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stream slot reserved for train/test splitting.
pub const SPLIT_STEP: u32 = u32::MAX;

/// Returns the stream for `(seed, step, column)`.
pub fn stream(seed: u64, step: u32, column: u32) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((step as u64) << 32) | column as u64);
    rng
}
