//! Monte Carlo estimates with standard errors.

use serde::{Deserialize, Serialize};

/// A point estimate and its standard error. Exact values have `stderr = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: 0.0 }
    }

    /// Sample mean and the standard error of the mean.
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut acc = Accumulator::default();
        samples.iter().for_each(|&x| acc.push(x));
        acc.estimate()
    }

    pub fn scaled(self, factor: f64) -> Self {
        Estimate {
            value: self.value * factor,
            stderr: self.stderr * factor.abs(),
        }
    }

    /// Whether `target` lies within `n_stderr` standard errors.
    pub fn agrees_with(&self, target: f64, n_stderr: f64) -> bool {
        (self.value - target).abs() <= n_stderr * self.stderr
    }

    /// Sum of independent estimates.
    pub fn sum(parts: impl IntoIterator<Item = Estimate>) -> Self {
        let (mut value, mut var) = (0.0, 0.0);
        for p in parts {
            value += p.value;
            var += p.stderr * p.stderr;
        }
        Estimate {
            value,
            stderr: var.sqrt(),
        }
    }
}

/// Streaming mean and variance (Welford), mergeable across blocks.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64) * (other.count as f64) / n as f64;
        self.count = n;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn estimate(&self) -> Estimate {
        let stderr = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            value: self.mean,
            stderr,
        }
    }
}
