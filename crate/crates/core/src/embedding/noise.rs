use rand::Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Exponent applied to unigram counts for the noise distribution.
pub const NOISE_POWER: f64 = 0.75;

/// Alias table over `count^0.75`: O(1) draws.
#[derive(Debug, Clone)]
pub struct NoiseTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
    weights: Vec<f64>,
}

impl NoiseTable {
    pub fn new(vocab: &Vocabulary) -> Result<Self> {
        Self::from_counts(vocab.counts())
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyVocab);
        }
        let raw: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(NOISE_POWER)).collect();
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptyVocab);
        }
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();

        // Vose's alias method.
        let n = weights.len();
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64).collect();
        let mut prob = vec![1.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            prob[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
        }
        Ok(NoiseTable {
            prob,
            alias,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    /// Exact probability of drawing `id`.
    pub fn probability(&self, id: u32) -> f64 {
        self.weights[id as usize]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i as u32
        } else {
            self.alias[i]
        }
    }
}
