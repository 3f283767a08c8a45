//! Gaussian bandit environments and seeded RNG streams.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// An N-armed bandit with Gaussian rewards.
///
/// Arm `a` pays `Normal(means[a], sigma^2)`. The best arm is the argmax of
/// the means with ties broken toward the lowest index.
#[derive(Debug, Clone, PartialEq)]
pub struct Bandit {
    means: Vec<f64>,
    sigma: f64,
    best_arm: usize,
    best_mean: f64,
}

impl Bandit {
    /// Builds a bandit from explicit arm means.
    pub fn from_means(means: Vec<f64>, sigma: f64) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "means",
                message: "need at least 2 arms".to_string(),
            });
        }
        if !(sigma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                message: format!("must be nonnegative, got {sigma}"),
            });
        }
        let mut best_arm = 0;
        for (a, &mu) in means.iter().enumerate() {
            if mu > means[best_arm] {
                best_arm = a;
            }
        }
        let best_mean = means[best_arm];
        Ok(Bandit { means, sigma, best_arm, best_mean })
    }

    /// Draws a fresh bandit with arm means sampled i.i.d. from `Normal(0, 1)`.
    pub fn sample(n_arms: usize, sigma: f64, rng: &mut impl Rng) -> Result<Self> {
        if n_arms < 2 {
            return Err(Error::InvalidParameter {
                name: "n_arms",
                message: "need at least 2 arms".to_string(),
            });
        }
        let means = (0..n_arms).map(|_| rng.sample(StandardNormal)).collect();
        Bandit::from_means(means, sigma)
    }

    pub fn arm_count(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn best_arm(&self) -> usize {
        self.best_arm
    }

    /// Mean of the best arm.
    pub fn best_mean(&self) -> f64 {
        self.best_mean
    }

    /// Draws one reward from the given arm.
    pub fn pull(&self, arm: usize, rng: &mut impl Rng) -> Result<f64> {
        let mu = *self.means.get(arm).ok_or(Error::VertexOutOfRange {
            vertex: arm,
            vertex_count: self.means.len(),
        })?;
        let noise: f64 = rng.sample(StandardNormal);
        Ok(mu + self.sigma * noise)
    }

    /// Per-arm suboptimality gaps `best_mean - means[a]`.
    pub fn regret_weights(&self) -> Vec<f64> {
        self.means.iter().map(|&mu| self.best_mean - mu).collect()
    }
}

/// Identifier of an independent random stream: the same `(seed, stream)`
/// always yields the same sample sequence, and distinct streams never share
/// state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// Stream feeding the environment (bandit draw) of one Monte-Carlo run.
    pub fn environment(seed: u64, run: u64) -> Self {
        RngStream::new(seed, run << 16)
    }

    /// Stream owned by one agent within one Monte-Carlo run.
    pub fn agent(seed: u64, run: u64, agent: usize) -> Self {
        RngStream::new(seed, (run << 16) | (agent as u64 + 1))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
