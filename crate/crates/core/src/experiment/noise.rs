//! Reproducible noise.
//!
//! The generator is xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Uniform variates are
//! `(next_u64 >> 11) * 2^-53` in [0, 1); standard normals come in pairs from
//! the Box–Muller transform
//!
//! ```text
//! z0 = sqrt(-2 ln(1 - a)) cos(2π b),  z1 = sqrt(-2 ln(1 - a)) sin(2π b)
//! ```
//!
//! for consecutive uniforms `a, b`. Integers in `[0, n)` use rejection
//! sampling on `next_u64` with the zone `u64::MAX - (u64::MAX % n + 1) % n`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct NoiseRng {
    inner: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl NoiseRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let a = self.uniform();
        let b = self.uniform();
        let radius = (-2.0 * (1.0 - a).ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * b;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Uniform integer in `[0, n)`, `n > 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let reject_from = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= reject_from {
                return v % n;
            }
        }
    }

    /// `k` distinct indices of `[0, n)` by a partial Fisher–Yates shuffle,
    /// in selection order.
    pub fn choose_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        let k = k.min(n);
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}
