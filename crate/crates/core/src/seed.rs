//! Counter-based seeding.
//!
//! Every random quantity in the crate is derived from a 64-bit master seed by
//! hashing it together with a counter (site coordinates, replicate index, a
//! stream tag). The hash is the SplitMix64 finalizer, a bijection on `u64`
//! with full avalanche, so nothing depends on evaluation order or thread count.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function applied to `x + golden gamma`.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes `key` under `seed`. For fixed `seed` this is injective in `key`.
#[inline]
pub fn mix(seed: u64, key: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ key)
}

/// Hashes a `(seed, a, b)` triple, used for per-replicate streams.
#[inline]
pub fn mix3(seed: u64, a: u64, b: u64) -> u64 {
    mix(mix(seed, a), b)
}

/// Maps 64 random bits to a uniform double in `[0, 1)` using the top 53 bits.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Stream tags for [`mix3`].
pub mod tag {
    pub const ENVIRONMENT: u64 = 0x454E_5649_524F_4E00;
    pub const WALK: u64 = 0x5741_4C4B_0000_0000;
    pub const KALIKOW: u64 = 0x4B41_4C49_4B4F_5700;
}
