//! SplitMix64 and the Fisher-Yates shuffle built on it.
//!
//! The generator is fixed (not pluggable) so that a trace can be reproduced
//! from its seed by any implementation of the same algorithm.

use alloc::vec::Vec;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)` from the top 53 bits of one output.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Random permutation of `0..n`.
///
/// Fisher-Yates from the end: for `i = n-1 ..= 1`, swap `i` with
/// `j = floor(u * (i + 1))`. Consumes exactly `n - 1` draws (none for
/// `n <= 1`).
pub fn shuffle(n: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_uniform() * (i + 1) as f64) as usize;
        perm.swap(i, j.min(i));
    }
    perm
}

/// Number of uniforms [`shuffle`] draws for a permutation of length `n`.
pub fn shuffle_draws(n: usize) -> usize {
    n.saturating_sub(1)
}
