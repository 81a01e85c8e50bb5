//! Derivation of independent RNG streams from one user-facing seed.

/// Fixed 64-bit mixing function (splitmix64 finalizer) combining a base seed
/// with a stream index. Used for per-tree, per-permutation, and per-field
/// RNG streams so parallel work is reproducible at any thread count.
pub(crate) fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}
