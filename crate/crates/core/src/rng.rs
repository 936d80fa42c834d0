//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`Rng`], a ChaCha8 stream
//! cipher generator. ChaCha is counter based: a 64-bit seed selects the key and
//! a 64-bit stream id selects an independent sequence, so `(seed, stream)`
//! pairs give reproducible, non-overlapping draws on every platform.

use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A child seed: the first word of stream `stream` under `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    rand::RngCore::next_u64(&mut self::stream(seed, stream))
}

#[inline]
pub fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn normals(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

#[inline]
pub fn uniform(rng: &mut Rng) -> f64 {
    rng.random::<f64>()
}

pub fn index(rng: &mut Rng, upper: usize) -> usize {
    rng.random_range(0..upper)
}

pub fn shuffle<T>(rng: &mut Rng, items: &mut [T]) {
    items.shuffle(rng);
}

/// Draws `n` indices with replacement, proportional to `weights`.
pub fn weighted_indices(rng: &mut Rng, weights: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w / total;
        cdf.push(acc);
    }
    (0..n)
        .map(|_| {
            let u = uniform(rng);
            cdf.partition_point(|c| *c < u).min(weights.len() - 1)
        })
        .collect()
}
