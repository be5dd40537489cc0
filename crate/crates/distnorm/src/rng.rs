//! Seedable, splittable randomness.
//!
//! All stochastic operations take an explicit stream so results are
//! reproducible per seed. Splitting derives statistically independent child
//! streams from (seed, child index) without advancing the parent, which is
//! what lets Monte-Carlo loops run chunked (or in parallel) with a
//! deterministic reduction order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A named pseudorandom stream backed by ChaCha12.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// The seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive child stream `index`, independent of the parent's position.
    pub fn split(&self, index: u64) -> Self {
        let child = splitmix64(self.seed ^ splitmix64(index.wrapping_add(1)));
        Self::from_seed(child)
    }

    /// Child stream drawn from the parent's current position; successive
    /// calls yield independent streams and advance the parent.
    pub fn derive(&mut self) -> Self {
        let bits = (self.rng.random::<u64>(), self.rng.random::<u64>());
        Self {
            seed: self.seed,
            rng: ChaCha12Rng::seed_from_u64(splitmix64(bits.0 ^ splitmix64(bits.1))),
        }
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}
