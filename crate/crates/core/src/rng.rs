//! The single pseudo-random generator used across the toolkit.
//!
//! All stochastic steps (noise, shuffling, weight init, dropout, NSGA-II
//! operators, validation sampling) draw from [`Prng`], a ChaCha8 stream
//! cipher generator. ChaCha output is specified bit-for-bit, so a seed
//! reproduces the same stream on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Prng = ChaCha8Rng;

/// Recorded in output metadata so runs are auditable.
pub const PRNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9)";

pub fn seeded(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}

/// A generator on an independent stream of the same seed.
///
/// Used for counter-style derivation, e.g. one stream per dataset record.
pub fn stream(seed: u64, stream: u64) -> Prng {
    let mut rng = Prng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a base seed with a salt (SplitMix64 finalizer).
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base
        .wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
