//! Deterministic derivation of independent RNG streams from a master seed.

/// Mixes `(seed, a, b)` into a stream seed with splitmix64 finalization.
///
/// Distinct `(a, b)` pairs give statistically independent ChaCha streams,
/// so restarts and trajectories can run concurrently yet reproduce exactly.
pub(crate) fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(a.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(b.wrapping_mul(0x94D0_49BB_1331_11EB));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
