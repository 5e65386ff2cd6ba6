//! Counter-based randomness keyed by (seed, square address).
//!
//! Every retention decision in the construction draws one uniform value that
//! is a pure function of the campaign seed and the address of the square being
//! decided. Two consequences the rest of the crate relies on:
//!
//! * traversal order is irrelevant — a depth-first survival probe, a
//!   breadth-first full sampling and a parallel sweep all see the same
//!   realization for the same seed;
//! * realizations are reproducible bit-for-bit across platforms, since only
//!   integer arithmetic and one `f64` comparison are involved.
//!
//! The mixer is the SplitMix64 finalizer (Steele, Lea, Flood 2014), applied to
//! a chain of the key words.

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes an arbitrary-length key into one 64-bit word.
#[inline]
pub fn mix_key(words: &[u64]) -> u64 {
    let mut acc = 0x243f_6a88_85a3_08d3; // pi fraction, arbitrary nonzero start
    for &w in words {
        acc = splitmix64(acc ^ w);
    }
    acc
}

/// Uniform value in [0, 1) with 53 mantissa bits, from one mixed word.
#[inline]
pub fn unit_from(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The retention draw for the level-`level` square with integer corner
/// coordinates `(ix, iy)` (units of M^-level). The digit path is recoverable
/// from these coordinates, so keying on them keys on the square's address.
#[inline]
pub fn square_unit(seed: u64, level: u32, ix: u64, iy: u64) -> f64 {
    unit_from(mix_key(&[seed, level as u64, ix, iy]))
}

/// Derives an independent stream seed, used for per-trial seeds and for
/// auxiliary processes that must not collide with square retention draws.
#[inline]
pub fn derive_seed(seed: u64, domain: u64, index: u64) -> u64 {
    mix_key(&[seed, 0x5eed_u64, domain, index])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(mix_key(&[1, 2, 3]), mix_key(&[1, 2, 3]));
        assert_ne!(mix_key(&[1, 2, 3]), mix_key(&[1, 3, 2]));
        assert_eq!(square_unit(7, 3, 4, 5), square_unit(7, 3, 4, 5));
    }

    #[test]
    fn unit_range_and_mean() {
        let mut sum = 0.0;
        let n = 20_000;
        for i in 0..n {
            let u = unit_from(mix_key(&[42, i]));
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn p_one_always_retains() {
        // max representable unit value is (2^53-1)/2^53 < 1, so `u < 1.0`
        // holds for every word; p = 1 retains everything.
        let max_word = u64::MAX;
        assert!(unit_from(max_word) < 1.0);
    }
}
