//! Closed-form rates (bits per channel use) and distortions.
//!
//! Expressions that can go negative at low SNR, such as `½ log(½ + P/N)`, are
//! clamped at zero and the returned struct records that a clamp happened.

use crate::infotheory::{binary_entropy, InfoError, Pmf};
use crate::math::{floor, log2, powf, powi};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RateError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error(transparent)]
    Info(#[from] InfoError),
}

fn positive(x: f64, what: &'static str) -> Result<(), RateError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(RateError::Domain(what))
    }
}

fn clamp(x: f64, flag: &mut bool) -> f64 {
    if x < 0.0 {
        *flag = true;
        0.0
    } else {
        x
    }
}

/// `½ log₂(1 + P/N)`.
pub fn awgn_capacity(p: f64, n: f64) -> Result<f64, RateError> {
    positive(p, "power must be positive")?;
    positive(n, "noise variance must be positive")?;
    Ok(0.5 * log2(1.0 + p / n))
}

/// `½ log₂(σ²/D)`, zero once `D ≥ σ²`.
pub fn gaussian_rd(sigma2: f64, d: f64) -> Result<f64, RateError> {
    positive(sigma2, "source variance must be positive")?;
    positive(d, "distortion must be positive")?;
    Ok(if d >= sigma2 { 0.0 } else { 0.5 * log2(sigma2 / d) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteMacRates {
    /// `log₂ q − H(Z)`, floored at zero.
    pub channel_capacity: f64,
    /// Source symbols of `U` per channel use: `(log₂ q − H(Z)) / H(U)`.
    pub capacity: f64,
    /// Full reconstruction of all sources: `(log₂ q − H(Z)) / H(S₁, …, S_M)`.
    pub r_random: f64,
}

pub fn discrete_mac_rates(q: u32, noise: &Pmf, h_u: f64, h_joint: f64) -> Result<DiscreteMacRates, RateError> {
    if noise.len() != q as usize {
        return Err(RateError::Domain("noise alphabet must match the field size"));
    }
    positive(h_u, "H(U) must be positive")?;
    positive(h_joint, "joint source entropy must be positive")?;
    let c = (log2(f64::from(q)) - noise.entropy()).max(0.0);
    Ok(DiscreteMacRates { channel_capacity: c, capacity: c / h_u, r_random: c / h_joint })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionTriple {
    /// `Mσ² (N/(N+MP)) (MN/(N+MP))^(ℓ−1)`.
    pub d_achievable: f64,
    /// `Mσ² (N/(N+MP))^ℓ`.
    pub d_lower: f64,
    /// Separate source-channel coding: `Mσ² (N/(N+MP))^(ℓ/M)`.
    pub d_random: f64,
}

fn check_mac(m: usize, p: f64, n: f64, sigma_s2: f64, ell: usize) -> Result<(), RateError> {
    if m == 0 || ell == 0 {
        return Err(RateError::Domain("users and ell must be at least 1"));
    }
    positive(p, "power must be positive")?;
    positive(n, "noise variance must be positive")?;
    positive(sigma_s2, "source variance must be positive")
}

pub fn gaussian_sum_distortions(m: usize, p: f64, n: f64, sigma_s2: f64, ell: usize) -> Result<DistortionTriple, RateError> {
    check_mac(m, p, n, sigma_s2, ell)?;
    let mf = m as f64;
    let base = n / (n + mf * p);
    let scale = mf * sigma_s2;
    Ok(DistortionTriple {
        d_achievable: scale * base * powi(mf * base, ell as i32 - 1),
        // same evaluation order as d_achievable, so the two agree bit for bit at M = 1
        d_lower: scale * base * powi(base, ell as i32 - 1),
        d_random: scale * powf(base, ell as f64 / mf),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayRates {
    /// Lattice scheme, `min(½ log(½ + P/N), R₀)`.
    pub r_lat: f64,
    /// Decode-and-forward, `min(¼ log(1 + 2P/N), R₀)`.
    pub r_df: f64,
    /// Compress-and-forward.
    pub r_cf: f64,
    /// Lattice scheme at finite `ℓ`: `r_lat − (1/2ℓ) log 4`.
    pub r_lat_finite_ell: Option<f64>,
    pub clamped: bool,
}

pub fn sum_difference_rates(p: f64, n: f64, r0: f64, ell: Option<usize>) -> Result<RelayRates, RateError> {
    positive(p, "power must be positive")?;
    positive(n, "noise variance must be positive")?;
    if !(r0 >= 0.0) {
        return Err(RateError::Domain("relay link capacity must be non-negative"));
    }
    if ell == Some(0) {
        return Err(RateError::Domain("ell must be at least 1"));
    }
    let s = p / n;
    let mut clamped = false;
    let r_lat = clamp(0.5 * log2(0.5 + s), &mut clamped).min(r0);
    let r_df = (0.25 * log2(1.0 + 2.0 * s)).min(r0);
    // 2^(2R₀) overflows for huge R₀; the expression tends to ½ log(1 + 2P/N)
    let g = crate::math::exp2(2.0 * r0);
    let r_cf = if g.is_finite() {
        0.5 * log2(1.0 + 2.0 * p * (g - 1.0) / (2.0 * p + n * g))
    } else {
        0.5 * log2(1.0 + 2.0 * s)
    };
    let r_lat_finite_ell = ell.map(|l| clamp(r_lat - log2(4.0) / (2.0 * l as f64), &mut clamped));
    Ok(RelayRates { r_lat, r_df, r_cf, r_lat_finite_ell, clamped })
}

/// SNR in `[lo, hi]` where the lattice rate overtakes the better of
/// decode-and-forward and compress-and-forward, with `R₀ = ½ log(1 + P/N)`.
pub fn relay_crossover_snr(lo: f64, hi: f64) -> Result<f64, RateError> {
    let gap = |s: f64| {
        let r0 = 0.5 * log2(1.0 + s);
        let r = sum_difference_rates(s, 1.0, r0, None).expect("positive snr");
        r.r_lat - r.r_df.max(r.r_cf)
    };
    bisect(gap, lo, hi)
}

/// Root of `f` in `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64, RateError> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if !(flo * fhi <= 0.0) {
        return Err(RateError::Domain("bracket does not contain a sign change"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryButterflyRates {
    /// `C + min(C, 1 − h_B(p))`.
    pub capacity: f64,
    /// `C + min(C, (1 − h_B(p))/2)`.
    pub r_df: f64,
    /// `C + min(C(1 − h_B(p)), 1 − h_B(p))`.
    pub r_cf: f64,
}

pub fn butterfly_binary_rates(c: f64, p: f64) -> Result<BinaryButterflyRates, RateError> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(RateError::Domain("link capacity must be non-negative"));
    }
    let g = 1.0 - binary_entropy(p)?;
    Ok(BinaryButterflyRates { capacity: c + c.min(g), r_df: c + c.min(g / 2.0), r_cf: c + (c * g).min(g) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianButterflyRates {
    /// `½ log(1 + P/N) + ½ log(½ + P/N)`.
    pub r_struct: f64,
    pub r_df: f64,
    pub r_cf: f64,
    /// Equivalent link capacity of the MAC under lattice processing.
    pub r3_lp: f64,
    /// Equivalent link capacity of the MAC under decode-and-forward.
    pub r3_df: f64,
    pub clamped: bool,
}

pub fn butterfly_gaussian_rates(p: f64, n: f64) -> Result<GaussianButterflyRates, RateError> {
    positive(p, "power must be positive")?;
    positive(n, "noise variance must be positive")?;
    let s = p / n;
    let mut clamped = false;
    let side = 0.5 * log2(1.0 + s);
    let r3_lp = clamp(0.5 * log2(0.5 + s), &mut clamped);
    let r3_df = 0.25 * log2(1.0 + 2.0 * s);
    Ok(GaussianButterflyRates {
        r_struct: side + r3_lp,
        r_df: side + r3_df,
        r_cf: side + 0.5 * log2(1.0 + s * p / (3.0 * p + n)),
        r3_lp,
        r3_df,
        clamped,
    })
}

/// Finite-`ℓ` rate of the structured butterfly scheme: the two sources carried
/// at worst distortion `9σ²(2N/(N+2P))^ℓ` plus the common message on the spare
/// side-path capacity. Tends to the `r_struct` of [`butterfly_gaussian_rates`].
pub fn butterfly_gaussian_finite_ell(p: f64, n: f64, ell: usize) -> Result<f64, RateError> {
    positive(p, "power must be positive")?;
    positive(n, "noise variance must be positive")?;
    if ell == 0 {
        return Err(RateError::Domain("ell must be at least 1"));
    }
    let s = p / n;
    let sources = log2(0.5 + s) - log2(9.0) / ell as f64;
    let common = 0.5 * log2(1.0 + s) - 0.5 * log2(0.5 + s);
    Ok(sources + common)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearProcessingRates {
    /// `½ log(1/J + P/N)`.
    pub r_lp: f64,
    /// `(1/2J) log(1 + JP/N)`.
    pub r_df: f64,
    pub clamped: bool,
}

pub fn linear_processing_rates(j: usize, p: f64, n: f64) -> Result<LinearProcessingRates, RateError> {
    if j == 0 {
        return Err(RateError::Domain("a MAC needs at least one user"));
    }
    positive(p, "power must be positive")?;
    positive(n, "noise variance must be positive")?;
    let jf = j as f64;
    let s = p / n;
    let mut clamped = false;
    Ok(LinearProcessingRates {
        r_lp: clamp(0.5 * log2(1.0 / jf + s), &mut clamped),
        r_df: log2(1.0 + jf * s) / (2.0 * jf),
        clamped,
    })
}

/// SNR above which linear processing beats decode-and-forward on a `J`-user MAC.
pub fn linear_processing_threshold(j: usize) -> Result<f64, RateError> {
    if j < 2 {
        return Err(RateError::Domain("the two rates coincide for a single user"));
    }
    let jf = j as f64;
    // unclamped difference; negative just above s = 1 - 1/J, positive for large s
    let gap = |s: f64| 0.5 * log2(1.0 / jf + s) - log2(1.0 + jf * s) / (2.0 * jf);
    bisect(gap, 1.0 - 1.0 / jf + 1e-9, 1e6)
}

/// Size summary of a network used by [`general_network_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkCounts {
    /// Ordinary (non-MAC) processing nodes.
    pub nodes: usize,
    /// MAC nodes.
    pub macs: usize,
    /// Links of the equivalent point-to-point network.
    pub links: usize,
    /// Largest link capacity in the equivalent network.
    pub max_capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralNetworkBound {
    /// Upper bound on the number of unit pipes: `⌊max C_e / λ⌋ · |E'|`.
    pub e_upper: usize,
    /// Distortion constant `γ² (|V_N| + |V_MAC|) e_upper (q−1)²`.
    pub alpha_distortion: f64,
    /// `alpha_distortion · (N_λ/(N_λ + P_λ))^ℓ`.
    pub d_ell: f64,
    /// `γλ − (γ/2ℓ) log α`.
    pub rate: f64,
    /// `P_λ` with `N_λ = 1`, so that `λ = ½ log(1 + P_λ)`.
    pub p_lambda: f64,
    pub n_lambda: f64,
}

/// End-to-end rate for a Gaussian MAC network carried as `gamma_sources` unit
/// Gaussian sources over `λ`-rate pipes with linear processing at every node.
pub fn general_network_bound(
    counts: &NetworkCounts,
    q: u32,
    lambda: f64,
    gamma_sources: usize,
    ell: usize,
) -> Result<GeneralNetworkBound, RateError> {
    positive(lambda, "pipe rate must be positive")?;
    if q < 2 || ell == 0 || gamma_sources == 0 {
        return Err(RateError::Domain("need q >= 2, ell >= 1 and at least one source"));
    }
    if !(counts.max_capacity >= 0.0) {
        return Err(RateError::Domain("capacities must be non-negative"));
    }
    let ratio = counts.max_capacity / lambda;
    let pipes = floor(ratio + 1e-9 * ratio.max(1.0)) as usize;
    let e_upper = pipes * counts.links;
    let g = gamma_sources as f64;
    let alpha = g * g * (counts.nodes + counts.macs) as f64 * e_upper as f64 * powi(f64::from(q - 1), 2);
    let n_lambda = 1.0;
    let p_lambda = crate::math::exp2(2.0 * lambda) - 1.0;
    let d_ell = alpha * powi(n_lambda / (n_lambda + p_lambda), ell as i32);
    let rate = g * lambda - g / (2.0 * ell as f64) * log2(alpha);
    Ok(GeneralNetworkBound { e_upper, alpha_distortion: alpha, d_ell, rate, p_lambda, n_lambda })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn awgn_and_rd() {
        assert_eq!(awgn_capacity(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(awgn_capacity(15.0, 1.0).unwrap(), 2.0);
        assert_eq!(gaussian_rd(2.0, 2.0).unwrap(), 0.0);
        assert_eq!(gaussian_rd(2.0, 3.0).unwrap(), 0.0);
        assert_eq!(gaussian_rd(1.0, 0.25).unwrap(), 1.0);
        assert!(awgn_capacity(0.0, 1.0).is_err());
        assert!(gaussian_rd(1.0, -1.0).is_err());
    }

    #[test]
    fn discrete_mac_examples() {
        let r = discrete_mac_rates(2, &Pmf::point_mass(2, 0), 1.0, 2.0).unwrap();
        assert_eq!(r.capacity, 1.0);
        assert_eq!(r.r_random, 0.5);
        let p = 0.11;
        let h = binary_entropy(p).unwrap();
        let r = discrete_mac_rates(2, &Pmf::bernoulli(p).unwrap(), h, 2.0).unwrap();
        assert!((r.capacity - (1.0 - h) / h).abs() < TOL);
        let r = discrete_mac_rates(2, &Pmf::bernoulli(p).unwrap(), 1.0, 2.0).unwrap();
        assert!((r.r_random - r.capacity / 2.0).abs() < TOL);
        let dead = discrete_mac_rates(2, &Pmf::uniform(2), 1.0, 2.0).unwrap();
        assert_eq!(dead.capacity, 0.0);
        assert!(discrete_mac_rates(2, &Pmf::uniform(2), 0.0, 2.0).is_err());
    }

    #[test]
    fn distortion_examples() {
        let d = gaussian_sum_distortions(2, 1.0, 1.0, 1.0, 2).unwrap();
        assert!((d.d_achievable - 4.0 / 9.0).abs() < TOL);
        assert!((d.d_lower - 2.0 / 9.0).abs() < TOL);
        assert!((d.d_random - 2.0 / 3.0).abs() < TOL);
        let d1 = gaussian_sum_distortions(3, 2.0, 1.0, 1.5, 1).unwrap();
        assert!((d1.d_achievable - d1.d_lower).abs() < TOL);
        let single = gaussian_sum_distortions(1, 3.0, 1.0, 2.0, 4).unwrap();
        assert!((single.d_achievable - single.d_random).abs() < TOL);
        assert!((single.d_achievable - single.d_lower).abs() < TOL);
    }

    #[test]
    fn lower_bound_below_achievable_on_grid() {
        for m in 1..=5 {
            for ell in 1..=6 {
                for &s in &[0.1, 1.0, 10.0, 100.0] {
                    let d = gaussian_sum_distortions(m, s, 1.0, 1.0, ell).unwrap();
                    assert!(d.d_lower <= d.d_achievable * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn relay_examples() {
        let r = sum_difference_rates(3.0, 1.0, 0.0, None).unwrap();
        assert_eq!((r.r_lat, r.r_df, r.r_cf), (0.0, 0.0, 0.0));
        let mut last = 0.0;
        for r0 in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 1e9] {
            let r = sum_difference_rates(3.0, 1.0, r0, None).unwrap();
            assert!(r.r_cf >= last);
            last = r.r_cf;
        }
        assert!((last - 0.5 * 7f64.log2()).abs() < 1e-9);
        let r = sum_difference_rates(10.0, 1.0, 1e6, Some(8)).unwrap();
        let finite = 0.5 * 10.5f64.log2() - 4f64.log2() / 16.0;
        assert!((r.r_lat_finite_ell.unwrap() - finite).abs() < TOL);
    }

    #[test]
    fn relay_crossover_near_one_and_a_half() {
        let s = relay_crossover_snr(0.6, 10.0).unwrap();
        assert!((s - 1.5).abs() < 1e-6, "{s}");
        let below = sum_difference_rates(1.4, 1.0, 0.5 * 2.4f64.log2(), None).unwrap();
        assert!(below.r_lat < below.r_df.max(below.r_cf));
        let above = sum_difference_rates(1.6, 1.0, 0.5 * 2.6f64.log2(), None).unwrap();
        assert!(above.r_lat > above.r_df.max(above.r_cf));
    }

    #[test]
    fn lattice_beats_df_where_the_uncapped_rates_say_so() {
        for i in 1..400 {
            let s = i as f64 * 0.05;
            let r = sum_difference_rates(s, 1.0, 100.0, None).unwrap();
            if 0.5 * (0.5 + s).log2() >= 0.25 * (1.0 + 2.0 * s).log2() {
                assert!(r.r_lat >= r.r_df);
            }
        }
    }

    #[test]
    fn binary_butterfly_examples() {
        for c in [0.0, 0.5, 1.0, 2.0] {
            let r = butterfly_binary_rates(c, 0.0).unwrap();
            let v = c + c.min(1.0);
            assert!((r.capacity - v).abs() < TOL);
            // decode-and-forward still splits the MAC between two messages
            assert!((r.r_df - (c + c.min(0.5))).abs() < TOL);
            assert!((r.r_cf - v).abs() < TOL);
        }
        let r = butterfly_binary_rates(1.0, 0.5).unwrap();
        assert_eq!(r.capacity, 1.0);
        let r = butterfly_binary_rates(1.0, 0.11).unwrap();
        assert!((r.capacity - (2.0 - binary_entropy(0.11).unwrap())).abs() < TOL);
        assert!(r.capacity > r.r_df && r.capacity >= r.r_cf);
        let mid = butterfly_binary_rates(0.7, 0.11).unwrap();
        assert!(mid.capacity > mid.r_df && mid.capacity > mid.r_cf);
        assert!(butterfly_binary_rates(-1.0, 0.1).is_err());
    }

    #[test]
    fn gaussian_butterfly_examples() {
        let r = butterfly_gaussian_rates(1.0, 1.0).unwrap();
        assert!((r.r_struct - (0.5 + 0.5 * 1.5f64.log2())).abs() < TOL);
        assert!(!r.clamped);
        let low = butterfly_gaussian_rates(0.1, 1.0).unwrap();
        assert!(low.clamped);
        assert_eq!(low.r3_lp, 0.0);
        let high = butterfly_gaussian_rates(100.0, 1.0).unwrap();
        assert!(high.r_struct > high.r_df && high.r_struct > high.r_cf);
        let mut prev = f64::NEG_INFINITY;
        for ell in [1, 2, 4, 8, 16, 64, 1 << 20] {
            let f = butterfly_gaussian_finite_ell(100.0, 1.0, ell).unwrap();
            assert!(f > prev);
            prev = f;
        }
        assert!((prev - high.r_struct).abs() < 1e-4);
    }

    #[test]
    fn linear_processing_examples() {
        let r = linear_processing_rates(1, 3.0, 1.0).unwrap();
        assert!((r.r_lp - r.r_df).abs() < TOL);
        let r = linear_processing_rates(2, 10.0, 1.0).unwrap();
        assert!((r.r_lp - 0.5 * 10.5f64.log2()).abs() < TOL);
        let t = linear_processing_threshold(2).unwrap();
        assert!((t - 1.5).abs() < 1e-9);
        for j in 2..=6 {
            let t = linear_processing_threshold(j).unwrap();
            let below = linear_processing_rates(j, 0.9 * t, 1.0).unwrap();
            let above = linear_processing_rates(j, 1.1 * t, 1.0).unwrap();
            assert!(below.r_df > below.r_lp && above.r_lp > above.r_df, "j={j}");
        }
        assert!(linear_processing_rates(3, 0.1, 1.0).unwrap().clamped);
    }

    #[test]
    fn general_bound_examples() {
        // butterfly: 6 ordinary nodes, one MAC, 9 links of capacity 1, λ = 1/4
        let counts = NetworkCounts { nodes: 6, macs: 1, links: 9, max_capacity: 1.0 };
        let b = general_network_bound(&counts, 3, 0.25, 8, 10).unwrap();
        assert_eq!(b.e_upper, 36);
        assert!((b.alpha_distortion - 64.0 * 7.0 * 36.0 * 4.0).abs() < TOL);
        assert!((b.p_lambda - (2f64.sqrt() - 1.0)).abs() < TOL);
        assert!((b.d_ell - b.alpha_distortion * 2f64.powf(-5.0)).abs() < 1e-9);
        let b5 = general_network_bound(&counts, 5, 0.25, 8, 10).unwrap();
        assert!((b5.alpha_distortion / b.alpha_distortion - 4.0).abs() < TOL);
        let mut prev = f64::NEG_INFINITY;
        for ell in [1, 10, 100, 1000, 1_000_000] {
            let r = general_network_bound(&counts, 3, 0.25, 8, ell).unwrap().rate;
            assert!(r > prev);
            prev = r;
        }
        assert!((prev - 2.0).abs() < 1e-3);
    }
}
