//! Keyed random streams.
//!
//! Every stochastic step draws from a stream derived from the run seed plus a
//! key path such as `(iteration, phase, interval)`. Streams depend only on the
//! key, never on scheduling, so results do not change with the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed and a key path into one 64-bit stream id.
pub fn stream_key(seed: u64, key: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &k in key {
        h = splitmix64(h ^ splitmix64(k.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

/// A reproducible generator for `(seed, key...)`.
pub fn stream(seed: u64, key: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, key))
}

/// Domain tags for the first key component.
pub mod tag {
    pub const INIT_COUPLING: u64 = 1;
    pub const BATCH: u64 = 2;
    pub const REFRESH: u64 = 3;
    pub const TRACK: u64 = 4;
    pub const NET_INIT: u64 = 5;
    pub const SIM: u64 = 6;
    pub const METRIC: u64 = 7;
    pub const SUBSAMPLE: u64 = 8;
}
