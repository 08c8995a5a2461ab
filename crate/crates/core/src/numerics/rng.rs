//! Seeded, portable random streams.
//!
//! Every simulator draws from a [`RngStream`]: ChaCha8 keyed by a 64-bit seed
//! with the replica index selecting the ChaCha stream. Uniforms are built from
//! the top 53 bits of each `u64` word, so a given `(seed, split)` pair yields
//! the same draws on every platform.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
    seed: u64,
    split: u64,
}

impl RngStream {
    pub fn new(seed: u64, split: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(split);
        Self { inner, seed, split }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn split_index(&self) -> u64 {
        self.split
    }

    /// Independent stream for replica `index`.
    pub fn split(&self, index: u64) -> Self {
        Self::new(self.seed, index)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential with mean 1 by inversion, `-ln U`.
    pub fn exp1(&mut self) -> f64 {
        -self.uniform_open().ln()
    }

    /// Exponential with the given mean, `-mean ln U`.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        mean * self.exp1()
    }

    /// Geometric on `{1, 2, ...}` with `P(k) = (1-b) b^{k-1}`, via `ceil(ln U / ln b)`.
    pub fn geometric(&mut self, b: f64) -> u64 {
        let u = self.uniform_open();
        let k = (u.ln() / b.ln()).ceil();
        if k < 1.0 {
            1
        } else if k >= u64::MAX as f64 {
            u64::MAX
        } else {
            k as u64
        }
    }

    /// Index drawn from a finite pmf by inverse CDF (1-based support offset is
    /// the caller's business).
    pub fn categorical(&mut self, cdf: &[f64]) -> usize {
        let u = self.uniform_open() * cdf.last().copied().unwrap_or(1.0);
        cdf.partition_point(|&c| c < u).min(cdf.len().saturating_sub(1))
    }
}
