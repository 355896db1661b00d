//! Deterministic pseudo-random numbers for instance generation and dataset splits.
//!
//! Everything downstream (instance files, dataset metadata, split-half shuffles)
//! promises bit-exact reproducibility from a stored 64-bit seed, across platforms
//! and releases. That rules out third-party generators whose streams may change
//! between versions, so the generator is pinned here in full: xorshift64*,
//! i.e. the xorshift steps `x ^= x >> 12; x ^= x << 25; x ^= x >> 27` followed by
//! multiplication with `0x2545F4914F6CDD1D`. The state is the 64-bit seed; a seed
//! of zero (invalid for xorshift) is remapped to a fixed odd constant.

#[derive(Debug, Clone)]
pub struct Xorshift64Star {
    state: u64,
}

impl Xorshift64Star {
    /// Seed 0 would lock xorshift at 0 forever; remap it to a fixed constant so
    /// every u64 is a valid seed.
    pub fn new(seed: u64) -> Self {
        Self {
            state: if seed == 0 { 0x9E3779B97F4A7C15 } else { seed },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    /// Uniform draw from `0..n` as `next_u64() % n`. The modulo bias is below
    /// 2^-32 for every `n` used here (n ≤ millions) and the simple reduction is
    /// part of the pinned stream contract.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }

    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}
