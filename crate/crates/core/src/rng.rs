//! Deterministic random streams.
//!
//! Every stochastic component takes an explicit [`PolicyRng`] so that runs
//! are a pure function of their seeds. The stream also counts Beta draws,
//! which is the instrumentation hook the complexity tests rely on.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

/// A seeded random stream with a Beta-draw counter.
///
/// Beta sampling uses the gamma-ratio method from `rand_distr`. Policies
/// consume the stream in a fixed documented order (permutations and random
/// dimension picks first, then Beta draws), so identical seeds reproduce
/// identical selections.
#[derive(Debug, Clone)]
pub struct PolicyRng {
    rng: ChaCha8Rng,
    beta_draws: u64,
}

impl PolicyRng {
    pub fn from_seed(seed: u64) -> Self {
        PolicyRng {
            rng: ChaCha8Rng::seed_from_u64(seed),
            beta_draws: 0,
        }
    }

    /// A stream with the same seed but an independent stream id; used to
    /// decouple e.g. policy randomness from environment randomness.
    pub fn from_seed_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        PolicyRng { rng, beta_draws: 0 }
    }

    /// One draw from Beta(alpha, beta). Parameters must be positive.
    pub fn beta(&mut self, alpha: f64, beta: f64) -> f64 {
        self.beta_draws += 1;
        Beta::new(alpha, beta)
            .expect("Beta parameters must be positive")
            .sample(&mut self.rng)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Bernoulli(p) draw as 0/1.
    pub fn bernoulli(&mut self, p: f64) -> u8 {
        u8::from(self.rng.random::<f64>() < p)
    }

    pub fn uniform_f64(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform choice in `1..=n`.
    pub fn uniform_choice(&mut self, n: u32) -> u32 {
        self.rng.random_range(1..=n)
    }

    /// Uniform dimension in `1..=dims`.
    pub fn uniform_dim(&mut self, dims: usize) -> usize {
        self.rng.random_range(1..=dims)
    }

    /// Uniformly random permutation of dimensions `1..=dims`.
    pub fn permutation(&mut self, dims: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (1..=dims).collect();
        order.shuffle(&mut self.rng);
        order
    }

    /// Number of Beta draws consumed so far.
    pub fn beta_draws(&self) -> u64 {
        self.beta_draws
    }

    pub fn reset_beta_draws(&mut self) {
        self.beta_draws = 0;
    }
}

/// Deterministic seed derivation for (master, replication, policy) triples.
///
/// Each word is passed through a SplitMix64-style finalizer and folded into
/// the accumulator, so distinct inputs map to well-separated seeds.
/// The frozen reference value `derive_seed(0, 0, 0)` is pinned by a test.
pub fn derive_seed(master: u64, replication: u64, policy: u64) -> u64 {
    let mut acc = splitmix64(master ^ 0x9e37_79b9_7f4a_7c15);
    acc = splitmix64(acc ^ splitmix64(replication.wrapping_add(0xbf58_476d_1ce4_e5b9)));
    acc = splitmix64(acc ^ splitmix64(policy.wrapping_add(0x94d0_49bb_1331_11eb)));
    acc
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
