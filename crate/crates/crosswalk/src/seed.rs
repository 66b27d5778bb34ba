//! Reproducible per-trial random streams.
//!
//! Trial `i` of a batch with master seed `m` uses the seed
//!
//! ```text
//! trial_seed(m, i) = mix64(m + (i + 1) * 0x9E3779B97F4A7C15)   (mod 2^64)
//! ```
//!
//! where `mix64` is the SplitMix64 output function (Steele, Lea & Flood,
//! "Fast splittable pseudorandom number generators"):
//!
//! ```text
//! z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//! z ^= z >> 27; z *= 0x94D049BB133111EB;
//! z ^= z >> 31;
//! ```
//!
//! The trial seed is then expanded into a 32-byte ChaCha8 key by taking four
//! successive SplitMix64 outputs (state initialized to the trial seed) in
//! little-endian byte order. Any implementation language that reproduces
//! these integer operations reproduces the exact streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SPLITMIX64_GAMMA: u64 = 0x9E3779B97F4A7C15;

/// SplitMix64 output function applied to `z`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Advances a SplitMix64 state and returns the next output.
#[inline]
pub fn splitmix64_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(SPLITMIX64_GAMMA);
    mix64(*state)
}

/// Seed for trial `index` in a batch with the given master seed.
pub fn derive_trial_seed(master_seed: u64, index: u64) -> u64 {
    mix64(master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(SPLITMIX64_GAMMA)))
}

/// The random stream for one trial.
pub fn trial_rng(trial_seed: u64) -> ChaCha8Rng {
    let mut state = trial_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64_next(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
