//! Running moments and the Monte-Carlo estimate type.

use rayon::prelude::*;
use serde::Serialize;

use crate::stable::RngStream;

/// Samples per block. Block `b` always draws from `key.substream(b)`, so
/// results do not depend on the number of worker threads.
pub const BLOCK_SIZE: u64 = 1024;

/// Runs `n` samples in fixed-size blocks on the current rayon pool and merges
/// the per-block accumulators in block order. The first error in block order wins.
pub(crate) fn try_run_blocks<F, E>(n: u64, key: &RngStream, sample_block: F) -> Result<Accumulator, E>
where
    F: Fn(&mut RngStream, u64) -> Result<Accumulator, E> + Sync,
    E: Send,
{
    let blocks = n.div_ceil(BLOCK_SIZE);
    let parts: Vec<Result<Accumulator, E>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK_SIZE.min(n - b * BLOCK_SIZE);
            let mut rng = key.substream(b);
            sample_block(&mut rng, count)
        })
        .collect();
    let mut total = Accumulator::new();
    for part in parts {
        total.merge(&part?);
    }
    Ok(total)
}

/// Mean and centered second moment accumulated with Welford updates.
/// Partial accumulators merge with Chan's formula, so block results can
/// be combined in a fixed order independent of how blocks were scheduled.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
    truncated: u64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn push_truncated(&mut self, x: f64, truncated: bool) {
        self.push(x);
        if truncated {
            self.truncated += 1;
        }
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.n as f64 * w;
        self.n = n;
        self.truncated += other.truncated;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn estimate(&self) -> Estimate {
        let stderr = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            stderr,
            n: self.n,
            truncation_fraction: if self.n > 0 {
                self.truncated as f64 / self.n as f64
            } else {
                0.0
            },
        }
    }
}

/// Monte-Carlo estimate: sample mean, standard error `sd/√n`, sample count,
/// and the fraction of samples cut short by a tree-size limit.
///
/// With a single sample the standard error is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub truncation_fraction: f64,
}

impl Estimate {
    /// A value known without sampling error.
    pub fn exact(value: f64, n: u64) -> Self {
        Estimate {
            mean: value,
            stderr: 0.0,
            n,
            truncation_fraction: 0.0,
        }
    }

    /// Empirical second moment `E[H²]`, reconstructed from mean and stderr.
    pub fn second_moment(&self) -> f64 {
        if self.n < 2 {
            return self.mean * self.mean;
        }
        let n = self.n as f64;
        let var = self.stderr * self.stderr * n;
        var * (n - 1.0) / n + self.mean * self.mean
    }

    /// Whether `other` agrees with `self` within `k` joint standard errors.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        let joint = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        (self.mean - other.mean).abs() <= k * joint
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1 - 3.0).collect();
        let mut all = Accumulator::new();
        xs.iter().for_each(|&x| all.push(x));
        let mut merged = Accumulator::new();
        for chunk in xs.chunks(77) {
            let mut part = Accumulator::new();
            chunk.iter().for_each(|&x| part.push(x));
            merged.merge(&part);
        }
        let (a, b) = (all.estimate(), merged.estimate());
        assert_eq!(a.n, b.n);
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.stderr - b.stderr).abs() < 1e-12);
    }

    #[test]
    fn stderr_definition() {
        let mut acc = Accumulator::new();
        for x in [1.0, 2.0, 3.0, 4.0] {
            acc.push(x);
        }
        let e = acc.estimate();
        // sample sd of 1..4 is sqrt(5/3)
        assert!((e.stderr - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert!((e.second_moment() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn single_and_constant_samples() {
        let mut acc = Accumulator::new();
        acc.push(2.5);
        assert_eq!(acc.estimate().stderr, 0.0);
        for _ in 0..10 {
            acc.push(2.5);
        }
        let e = acc.estimate();
        assert_eq!(e.mean, 2.5);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn truncation_fraction() {
        let mut acc = Accumulator::new();
        acc.push_truncated(0.0, true);
        acc.push_truncated(1.0, false);
        acc.push_truncated(1.0, false);
        acc.push_truncated(1.0, false);
        assert_eq!(acc.estimate().truncation_fraction, 0.25);
    }
}
