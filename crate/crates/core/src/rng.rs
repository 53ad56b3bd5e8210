//! Counter-based randomness.
//!
//! Every random decision in this crate derives from a stateless 64-bit mix of
//! a seed and a counter (cell coordinates, trial index, rectangle ordinal).
//! There is no generator state to advance, so the same cell, trial or
//! rectangle gets the same decision regardless of traversal order or of how
//! work is split across threads.

/// SplitMix64 finalizer. Bijective on u64 with strong avalanche.
#[inline]
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collision-resistant combination of two words.
#[inline]
pub fn mix2(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b)
}

/// Uniform draw in [0, 1) from a hash word (53 mantissa bits).
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn pack_coords(x: i32, y: i32) -> u64 {
    ((x as u32 as u64) << 32) | (y as u32 as u64)
}

/// Bernoulli(p) decision for one lattice cell, keyed by absolute coordinates.
#[inline]
pub fn cell_decision(seed: u64, x: i32, y: i32, p: f64) -> bool {
    unit_f64(mix2(seed, pack_coords(x, y))) < p
}

/// Per-trial seed for Monte Carlo runs.
#[inline]
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    mix2(master ^ 0x7472_6961_6c73_6565, trial)
}

/// Uniform index in `0..len` keyed by (seed, ordinal). `len` must be nonzero.
#[inline]
pub fn pick_index(seed: u64, ordinal: u64, len: u64) -> u64 {
    debug_assert!(len > 0);
    // Bias is at most len / 2^64, immaterial for placement choices.
    mix2(seed ^ 0x706c_6163_656d_656e, ordinal) % len
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_f64_range() {
        for i in 0..10_000u64 {
            let u = unit_f64(splitmix64(i));
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn cell_decision_extremes() {
        for i in 0..100 {
            assert!(!cell_decision(42, i, -i, 0.0));
            assert!(cell_decision(42, i, -i, 1.0));
        }
    }

    #[test]
    fn mix_is_order_sensitive() {
        assert_ne!(mix2(1, 2), mix2(2, 1));
        assert_ne!(trial_seed(7, 8), trial_seed(8, 7));
    }
}
