//! Monte Carlo summaries and Gaussian sampling.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::math::sqrt;

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Error count over a number of independent trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRate {
    pub errors: u64,
    pub trials: u64,
}

impl ErrorRate {
    pub fn new(errors: u64, trials: u64) -> Self {
        Self { errors, trials }
    }

    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.errors as f64 / self.trials as f64
        }
    }

    /// Two-sided 95% Wilson score interval.
    pub fn wilson_95(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.trials, Z_95)
    }
}

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // the bounds are exactly 0 and 1 at the extremes; avoid rounding residue there
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

pub fn mean_estimate(values: &[f64]) -> MeanEstimate {
    let n = values.len();
    if n == 0 {
        return MeanEstimate { mean: 0.0, std_err: 0.0, samples: 0 };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    MeanEstimate { mean, std_err: sqrt(var / n as f64), samples: n }
}

/// Mean of `(a_i - b_i)^2`.
pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// `len` i.i.d. draws from `N(0, var)`.
pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize, var: f64) -> Vec<f64> {
    let sd = sqrt(var);
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sd * z
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn wilson_brackets_the_rate() {
        let r = ErrorRate::new(30, 100);
        let (lo, hi) = r.wilson_95();
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((lo - 0.2189).abs() < 1e-3);
        assert!((hi - 0.3958).abs() < 1e-3);
        assert_eq!(ErrorRate::new(0, 0).wilson_95(), (0.0, 1.0));
        let (lo, _) = ErrorRate::new(0, 50).wilson_95();
        assert_eq!(lo, 0.0);
    }

    #[test]
    fn gaussian_vec_has_requested_variance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let v = gaussian_vec(&mut rng, 100_000, 2.0);
        let m = mean_estimate(&v);
        assert!(m.mean.abs() < 0.02);
        let second: f64 = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        assert!((second - 2.0).abs() < 0.04);
    }
}
