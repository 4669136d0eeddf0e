//! Entropies in bits and the doubly-symmetric binary source.
//!
//! All logarithms are base 2 and `0 · log 0` is taken to be 0.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::log2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InfoError {
    #[error("probability {0} outside [0, 1]")]
    Domain(f64),
    #[error("invalid pmf: {0}")]
    InvalidPmf(&'static str),
}

/// Tolerance on `Σ p_i = 1`.
pub const PMF_SUM_TOL: f64 = 1e-12;

#[inline]
fn plogp(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        -p * log2(p)
    }
}

pub fn binary_entropy(p: f64) -> Result<f64, InfoError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(InfoError::Domain(p));
    }
    Ok(plogp(p) + plogp(1.0 - p))
}

/// A probability mass function over `{0, 1, …, len-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self, InfoError> {
        if probs.is_empty() {
            return Err(InfoError::InvalidPmf("empty support"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(InfoError::InvalidPmf("negative or non-finite entry"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(InfoError::InvalidPmf("entries do not sum to 1"));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self { probs: vec![1.0 / n as f64; n] }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    /// Bernoulli(p) on `{0, 1}`.
    pub fn bernoulli(p: f64) -> Result<Self, InfoError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(InfoError::Domain(p));
        }
        Ok(Self { probs: vec![1.0 - p, p] })
    }

    /// `1 - p` at 0 and `p` spread evenly over the other `q - 1` symbols.
    pub fn symmetric(q: usize, p: f64) -> Result<Self, InfoError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(InfoError::Domain(p));
        }
        if q < 2 {
            return Err(InfoError::InvalidPmf("alphabet needs at least two symbols"));
        }
        let mut probs = vec![p / (q - 1) as f64; q];
        probs[0] = 1.0 - p;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs.get(x).copied().unwrap_or(0.0)
    }

    pub fn entropy(&self) -> f64 {
        self.probs.iter().map(|&p| plogp(p)).sum()
    }

    /// Natural-log probabilities, `-inf` on zero-mass symbols.
    pub fn log_probs(&self) -> Vec<f64> {
        self.probs
            .iter()
            .map(|&p| if p == 0.0 { f64::NEG_INFINITY } else { crate::math::ln(p) })
            .collect()
    }

    /// Inverse-CDF draw.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // rounding left u above the running sum; fall back to the last supported symbol
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

/// `pmf_entropy` as a free function over raw probabilities.
pub fn pmf_entropy(probs: &[f64]) -> Result<f64, InfoError> {
    Ok(Pmf::new(probs.to_vec())?.entropy())
}

/// Joint law of `(S1, S2)` with `Pr(00)=Pr(11)=(1-p)/2`, `Pr(01)=Pr(10)=p/2`, and the
/// law of `U = S1 ⊕ S2`.
#[derive(Debug, Clone, PartialEq)]
pub struct XorSource {
    /// `joint[s1][s2]`.
    pub joint: [[f64; 2]; 2],
    pub sum: Pmf,
    pub flip: f64,
}

impl XorSource {
    pub fn marginal_s1(&self) -> [f64; 2] {
        [self.joint[0][0] + self.joint[0][1], self.joint[1][0] + self.joint[1][1]]
    }

    pub fn marginal_s2(&self) -> [f64; 2] {
        [self.joint[0][0] + self.joint[1][0], self.joint[0][1] + self.joint[1][1]]
    }

    /// `H(S1, S2) = 1 + h_B(p)`.
    pub fn joint_entropy(&self) -> f64 {
        self.joint.iter().flatten().map(|&p| plogp(p)).sum()
    }

    /// One `(s1, s2)` pair.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> (u8, u8) {
        let s1 = u8::from(rng.random_bool(0.5));
        let flip = u8::from(rng.random::<f64>() < self.flip);
        (s1, s1 ^ flip)
    }
}

pub fn xor_source_pmf(p: f64) -> Result<XorSource, InfoError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(InfoError::Domain(p));
    }
    let same = (1.0 - p) / 2.0;
    let diff = p / 2.0;
    Ok(XorSource { joint: [[same, diff], [diff, same]], sum: Pmf::bernoulli(p)?, flip: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        // -0.11 log2 0.11 - 0.89 log2 0.89, evaluated term by term
        let t1 = 0.11 * (1.0f64 / 0.11).log2();
        let t2 = 0.89 * (1.0f64 / 0.89).log2();
        assert!((binary_entropy(0.11).unwrap() - (t1 + t2)).abs() < 1e-15);
        assert!((binary_entropy(0.11).unwrap() - 0.499_915_958_164_528_6).abs() < 1e-12);
        assert_eq!(binary_entropy(-0.1), Err(InfoError::Domain(-0.1)));
        assert_eq!(binary_entropy(1.5), Err(InfoError::Domain(1.5)));
    }

    #[test]
    fn binary_entropy_is_symmetric() {
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let a = binary_entropy(p).unwrap();
            let b = binary_entropy(1.0 - p).unwrap();
            assert!((a - b).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn pmf_entropy_examples() {
        assert_eq!(pmf_entropy(&[0.25; 4]).unwrap(), 2.0);
        assert_eq!(pmf_entropy(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(pmf_entropy(&[0.5, 0.25, 0.25]).unwrap(), 1.5);
        assert!(matches!(pmf_entropy(&[0.5, 0.6]), Err(InfoError::InvalidPmf(_))));
        assert!(matches!(pmf_entropy(&[1.5, -0.5]), Err(InfoError::InvalidPmf(_))));
        assert!(matches!(pmf_entropy(&[]), Err(InfoError::InvalidPmf(_))));
    }

    #[test]
    fn entropy_bounded_by_log_alphabet_with_equality_only_for_uniform() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 2..9usize {
            let u = Pmf::uniform(n);
            assert!((u.entropy() - (n as f64).log2()).abs() < 1e-12);
            for _ in 0..50 {
                let raw: Vec<f64> = (0..n).map(|_| rand::Rng::random::<f64>(&mut rng) + 0.01).collect();
                let total: f64 = raw.iter().sum();
                let mut probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
                let fix = 1.0 - probs.iter().sum::<f64>();
                probs[0] += fix;
                let pmf = Pmf::new(probs.clone()).unwrap();
                let h = pmf.entropy();
                assert!(h <= (n as f64).log2() + 1e-12);
                let is_uniform = probs.iter().all(|p| (p - 1.0 / n as f64).abs() < 1e-9);
                if !is_uniform {
                    assert!(h < (n as f64).log2() - 1e-12);
                }
            }
        }
    }

    #[test]
    fn xor_source_examples() {
        let s = xor_source_pmf(0.0).unwrap();
        assert_eq!(s.sum.probs(), &[1.0, 0.0]);
        let s = xor_source_pmf(0.5).unwrap();
        assert!(s.joint.iter().flatten().all(|&p| p == 0.25));
        let s = xor_source_pmf(0.1).unwrap();
        assert_eq!(s.marginal_s1(), [0.5, 0.5]);
        assert_eq!(s.marginal_s2(), [0.5, 0.5]);
        assert!((s.sum.entropy() - binary_entropy(0.1).unwrap()).abs() < 1e-15);
        assert!((s.joint_entropy() - 1.0 - binary_entropy(0.1).unwrap()).abs() < 1e-12);
        assert!(xor_source_pmf(1.1).is_err());
    }

    #[test]
    fn xor_source_marginals_uniform_on_grid() {
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let s = xor_source_pmf(p).unwrap();
            assert_eq!(s.marginal_s1(), [0.5, 0.5]);
            assert_eq!(s.marginal_s2(), [0.5, 0.5]);
        }
    }

    #[test]
    fn sampling_follows_pmf() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let pmf = Pmf::new(vec![0.2, 0.0, 0.8]).unwrap();
        let mut counts = [0usize; 3];
        for _ in 0..20_000 {
            counts[pmf.sample(&mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!((counts[0] as f64 / 20_000.0 - 0.2).abs() < 0.015);
    }
}
