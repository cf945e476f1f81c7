//! Deterministic random streams.
//!
//! Every run draws from a ChaCha8 stream ([`SimRng`]). Run `r` of an experiment
//! with base seed `s` is seeded with `s XOR r` through
//! `ChaCha8Rng::seed_from_u64`, so replicates are independent of scheduling
//! and of how many worker threads execute them. Normal variates come from the
//! ziggurat sampler in `rand_distr::StandardNormal`, which is a fixed,
//! platform-independent transform of the underlying 64-bit words.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SimRng = ChaCha8Rng;

/// Seed rule for replicate `run_id` of an experiment.
pub fn substream_seed(base_seed: u64, run_id: u64) -> u64 {
    base_seed ^ run_id
}

pub fn substream(base_seed: u64, run_id: u64) -> SimRng {
    SimRng::seed_from_u64(substream_seed(base_seed, run_id))
}

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

#[inline]
pub fn standard_normal(rng: &mut SimRng) -> f64 {
    rng.sample(StandardNormal)
}

#[inline]
pub fn uniform(rng: &mut SimRng) -> f64 {
    rng.random::<f64>()
}

#[inline]
pub fn bernoulli(rng: &mut SimRng, p: f64) -> bool {
    rng.random::<f64>() < p
}

#[inline]
pub fn index(rng: &mut SimRng, n: usize) -> usize {
    rng.random_range(0..n)
}
