//! Portable seeded random stream.
//!
//! The generator is xoshiro256** seeded from a `u64` through SplitMix64
//! (the reference seeding procedure). The derived draws are fixed here so a
//! seed reproduces the same samples on every platform:
//!
//! * [`SeededRng::next_f64`]: top 53 bits scaled by 2⁻⁵³, in `[0, 1)`
//! * [`SeededRng::below`]: Lemire's multiply-shift with rejection, unbiased
//! * [`SeededRng::standard_normal`]: Box–Muller cosine branch, one normal per two uniforms

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: Xoshiro256StarStar,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound`. Panics if `bound` is zero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let mut m = self.next_u64() as u128 * bound as u128;
        let mut low = m as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                m = self.next_u64() as u128 * bound as u128;
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    pub fn standard_normal(&mut self) -> f64 {
        // 1 - u keeps the logarithm finite
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }

    pub fn lognormal(&mut self, mu_log: f64, sigma_log: f64) -> f64 {
        libm::exp(self.normal(mu_log, sigma_log))
    }

    /// Moves a uniform random selection of `k` elements to the front of `items`
    /// (partial Fisher–Yates).
    pub fn partial_shuffle<T>(&mut self, items: &mut [T], k: usize) {
        let n = items.len();
        for i in 0..k.min(n) {
            let j = i + self.below((n - i) as u64) as usize;
            items.swap(i, j);
        }
    }
}
