//! Walker/Vose alias tables for constant-time discrete sampling.

use rand::Rng;

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;
/// Scaled probabilities this close to 1 are treated as one full column each;
/// the encoded distribution moves by at most this much over `n`.
const UNIFORM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
    /// Every column is full, so a draw never consults `prob` or `alias`.
    uniform: bool,
}

impl AliasTable {
    /// Builds a table for `probs`, which must be non-negative and sum to one.
    pub fn new(probs: &[f64]) -> Result<Self> {
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::NegativeProbability { index, value });
        }
        let sum: f64 = probs.iter().sum();
        if probs.is_empty() || (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }

        let n = probs.len();
        let mut prob: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
        if prob.iter().all(|p| (p - 1.0).abs() <= UNIFORM_TOLERANCE) {
            return Ok(AliasTable {
                prob: vec![1.0; n],
                alias: (0..n).collect(),
                uniform: true,
            });
        }
        let mut alias: Vec<usize> = (0..n).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| prob[i] < 1.0);

        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            alias[s] = l;
            prob[l] -= 1.0 - prob[s];
            if prob[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Whatever is left differs from 1 only by rounding.
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
            alias[i] = i;
        }
        Ok(AliasTable {
            prob,
            alias,
            uniform: false,
        })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn prob(&self) -> &[f64] {
        &self.prob
    }

    pub fn alias(&self) -> &[usize] {
        &self.alias
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if self.uniform || rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }

    /// Recovers the distribution the table encodes.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut out: Vec<f64> = self.prob.iter().map(|p| p / n).collect();
        for (i, &a) in self.alias.iter().enumerate() {
            if a != i {
                out[a] += (1.0 - self.prob[i]) / n;
            }
        }
        out
    }
}

pub fn build_alias(probs: &[f64]) -> Result<AliasTable> {
    AliasTable::new(probs)
}
