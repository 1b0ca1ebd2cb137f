//! Seeded randomness. Every random quantity in the crate is drawn from a
//! [`ChaCha8Rng`] stream whose seed is derived from a user-supplied master
//! seed, so results never depend on ambient entropy or on scheduling.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a, used to turn stable names into seed salts.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of an independent sub-stream identified by `(salt, index)`.
pub fn derive_seed(master: u64, salt: u64, index: u64) -> u64 {
    mix64(master ^ mix64(salt) ^ index)
}

pub fn stream(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
