//! Seeded random streams.
//!
//! Every random decision in the pipeline draws from a ChaCha8 generator keyed
//! by a 64-bit seed and a purpose-specific stream id, so scene placement,
//! colour jitter, weather noise and flock spawning never share state. Derived
//! seeds come from [`mix`], a SplitMix64-based combiner that is stable across
//! platforms and releases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams carved out of a single seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    Scene = 1,
    Color = 2,
    Weather = 3,
    Flock = 4,
    Environment = 5,
    Background = 6,
    Split = 7,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines two values into a well-mixed 64-bit seed. Not commutative.
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b.rotate_left(17) ^ 0xD1B5_4A32_D192_ED03)
}

/// Seed for frame `index` of a dataset generated from `master`.
pub fn frame_seed(master: u64, index: u64) -> u64 {
    mix(master, index)
}
