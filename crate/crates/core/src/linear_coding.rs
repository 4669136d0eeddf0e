//! Linear codes over `F_q` with exhaustive maximum-likelihood decoding.
//!
//! Three schemes are built on the same machinery:
//!
//! - channel coding over an additive-noise channel `y = wG + z`;
//! - Körner–Marton coding, where both encoders send the syndrome `sH` of their
//!   binary source and the decoder recovers `u = s1 ⊕ s2` from the XOR of the
//!   syndromes;
//! - computation over a discrete linear MAC `y = Σ β_j x_j + z`, where encoder `j`
//!   sends `x_j = β_j⁻¹ α_j s_j H G` so the channel itself forms `uHG` with
//!   `u = Σ α_j s_j`.
//!
//! Decoders enumerate every hypothesis in lexicographic order and keep the first
//! strict maximum, so ties resolve to the lexicographically smallest candidate.
//! Searches larger than [`SEARCH_LIMIT`] hypotheses are refused.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::gf::{FieldMatrix, GfError, PrimeField};
use crate::infotheory::{binary_entropy, InfoError, Pmf, XorSource};
use crate::math::{ceil_count, ln, sqrt};

/// Hard cap on the number of hypotheses an exhaustive decoder may visit.
pub const SEARCH_LIMIT: u128 = 1 << 24;

/// Largest blocklength the syndrome decoder accepts.
pub const MAX_SYNDROME_BLOCK: usize = 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodingError {
    #[error("dimension error: {0}")]
    Dimension(&'static str),
    #[error("exhaustive search over {hypotheses} hypotheses exceeds the limit of {limit}")]
    SearchTooLarge { hypotheses: u128, limit: u128 },
    #[error("operation needs a {0} code")]
    WrongKind(&'static str),
    #[error("operation is only defined over F_2")]
    NotBinary,
    #[error("no source sequence has the given syndrome")]
    NoCandidate,
    #[error("channel coefficient β_{0} is zero")]
    ZeroChannelCoefficient(usize),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Info(#[from] InfoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeKind {
    /// `k × n` generator; messages `w ∈ F^k` map to `wG`.
    Channel,
    /// `n × m` compression matrix; sources `s ∈ F^n` map to syndromes `sH`.
    Source,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearCode {
    gen: FieldMatrix,
    kind: CodeKind,
}

impl LinearCode {
    pub fn channel(gen: FieldMatrix) -> Self {
        Self { gen, kind: CodeKind::Channel }
    }

    pub fn source(h: FieldMatrix) -> Self {
        Self { gen: h, kind: CodeKind::Source }
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.gen
    }

    pub fn field(&self) -> PrimeField {
        self.gen.field()
    }

    /// Input length: `k` for a channel code, `n` for a source code.
    pub fn input_len(&self) -> usize {
        self.gen.rows()
    }

    pub fn output_len(&self) -> usize {
        self.gen.cols()
    }

    /// Realized rate: `k/n` for channel codes, `m/n` for source codes.
    pub fn rate(&self) -> f64 {
        match self.kind {
            CodeKind::Channel => self.gen.rows() as f64 / self.gen.cols() as f64,
            CodeKind::Source => self.gen.cols() as f64 / self.gen.rows() as f64,
        }
    }

    /// `x · G` (or `s · H`).
    pub fn encode(&self, x: &[u32]) -> Result<Vec<u32>, CodingError> {
        if x.len() != self.gen.rows() {
            return Err(CodingError::Dimension("input length differs from code input length"));
        }
        Ok(self.gen.left_mul_vec(x)?)
    }
}

/// Channel code with a `k × n` generator of i.i.d. uniform entries.
pub fn random_linear_code<R: Rng + ?Sized>(
    field: PrimeField,
    k: usize,
    n: usize,
    rng: &mut R,
) -> Result<LinearCode, CodingError> {
    if k == 0 || k > n {
        return Err(CodingError::Dimension("need 1 <= k <= n"));
    }
    Ok(LinearCode::channel(FieldMatrix::random(field, k, n, rng)))
}

/// Source code with an `n × ⌈nR⌉` compression matrix of i.i.d. uniform entries.
pub fn random_source_code<R: Rng + ?Sized>(
    field: PrimeField,
    n: usize,
    rate: f64,
    rng: &mut R,
) -> Result<LinearCode, CodingError> {
    if n == 0 || !(rate > 0.0 && rate <= 1.0) {
        return Err(CodingError::Dimension("need n >= 1 and 0 < rate <= 1"));
    }
    let m = ceil_count(n, rate).max(1);
    Ok(LinearCode::source(FieldMatrix::random(field, n, m, rng)))
}

fn check_search(q: u32, k: usize) -> Result<(), CodingError> {
    let hypotheses = (q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if hypotheses > SEARCH_LIMIT {
        return Err(CodingError::SearchTooLarge { hypotheses, limit: SEARCH_LIMIT });
    }
    Ok(())
}

fn histogram_score(counts: &[u32], log_probs: &[f64]) -> f64 {
    counts
        .iter()
        .zip(log_probs)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &lp)| c as f64 * lp)
        .sum()
}

/// MAP estimate of `w ∈ F^k` from `y = wG + z`, `z` i.i.d. `noise`, `w` i.i.d. `prior`
/// (uniform when `None`).
///
/// Scores are computed from symbol histograms in a fixed symbol order, so
/// hypotheses with equal histograms get bit-identical scores and the tie-break is
/// exact.
pub(crate) fn exhaustive_map(gen: &FieldMatrix, y: &[u32], noise: &Pmf, prior: Option<&Pmf>) -> Vec<u32> {
    let field = gen.field();
    let q = field.order() as usize;
    let (k, n) = (gen.rows(), gen.cols());
    let noise_lp = noise.log_probs();
    let prior_lp = prior.map(Pmf::log_probs);

    if q == 2 && n <= 64 && k <= 63 {
        return map_binary(gen, y, &noise_lp, prior_lp.as_deref());
    }

    let mut w = vec![0u32; k];
    let mut c = vec![0u32; n];
    let mut w_counts = vec![0u32; q];
    w_counts[0] = k as u32;
    let mut z_counts = vec![0u32; q];

    let score_of = |c: &[u32], z_counts: &mut [u32], w_counts: &[u32]| {
        z_counts.iter_mut().for_each(|v| *v = 0);
        for (&yi, &ci) in y.iter().zip(c) {
            z_counts[field.sub(yi, ci) as usize] += 1;
        }
        let mut s = histogram_score(z_counts, &noise_lp);
        if let Some(lp) = &prior_lp {
            s += histogram_score(w_counts, lp);
        }
        s
    };

    let mut best = w.clone();
    let mut best_score = score_of(&c, &mut z_counts, &w_counts);
    'outer: loop {
        // odometer step: digits after the last non-maximal one wrap to 0, which in
        // F_q also amounts to adding their row once more
        let Some(j) = (0..k).rev().find(|&i| w[i] + 1 < q as u32) else {
            break 'outer;
        };
        for i in j..k {
            w_counts[w[i] as usize] -= 1;
            w[i] = if i == j { w[i] + 1 } else { 0 };
            w_counts[w[i] as usize] += 1;
            for (cc, &g) in c.iter_mut().zip(gen.row(i)) {
                *cc = field.add(*cc, g);
            }
        }
        let s = score_of(&c, &mut z_counts, &w_counts);
        if s > best_score {
            best_score = s;
            best.copy_from_slice(&w);
        }
    }
    best
}

fn map_binary(gen: &FieldMatrix, y: &[u32], noise_lp: &[f64], prior_lp: Option<&[f64]>) -> Vec<u32> {
    let (k, n) = (gen.rows(), gen.cols());
    let to_mask = |v: &[u32]| v.iter().enumerate().fold(0u64, |m, (i, &b)| m | ((b as u64 & 1) << i));
    let rows: Vec<u64> = (0..k).map(|r| to_mask(gen.row(r))).collect();
    let y_mask = to_mask(y);
    let score = |c: u64, w_weight: u32| {
        let flips = (c ^ y_mask).count_ones();
        let mut s = histogram_score(&[n as u32 - flips, flips], noise_lp);
        if let Some(lp) = prior_lp {
            s += histogram_score(&[k as u32 - w_weight, w_weight], lp);
        }
        s
    };
    // message index m has w[0] as its most significant bit, so counting up in m is
    // lexicographic order in w
    let total = 1u64 << k;
    let mut c = 0u64;
    let mut best_idx = 0u64;
    let mut best_score = score(0, 0);
    for m in 1..total {
        // bits that flip between m-1 and m are the trailing ones of m-1 plus one
        let changed = m ^ (m - 1);
        let mut bits = changed;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            c ^= rows[k - 1 - b];
            bits &= bits - 1;
        }
        let s = score(c, m.count_ones());
        if s > best_score {
            best_score = s;
            best_idx = m;
        }
    }
    (0..k).map(|i| ((best_idx >> (k - 1 - i)) & 1) as u32).collect()
}

/// Maximum-likelihood message for `y = wG + z`.
pub fn ml_decode_additive(code: &LinearCode, y: &[u32], noise: &Pmf) -> Result<Vec<u32>, CodingError> {
    if code.kind != CodeKind::Channel {
        return Err(CodingError::WrongKind("channel"));
    }
    let field = code.field();
    if y.len() != code.output_len() {
        return Err(CodingError::Dimension("received length differs from blocklength"));
    }
    if noise.len() != field.order() as usize {
        return Err(CodingError::Dimension("noise pmf alphabet differs from field size"));
    }
    for &v in y {
        field.check(v)?;
    }
    check_search(field.order(), code.input_len())?;
    Ok(exhaustive_map(&code.gen, y, noise, None))
}

fn tail_at_least(w: usize, threshold: usize, p: f64) -> f64 {
    // Pr(Bin(w, p) >= threshold)
    let mut total = 0.0;
    let mut binom = 1.0f64;
    for e in 0..=w {
        if e > 0 {
            binom = binom * (w - e + 1) as f64 / e as f64;
        }
        if e >= threshold {
            total += binom * crate::math::powi(p, e as i32) * crate::math::powi(1.0 - p, (w - e) as i32);
        }
    }
    total
}

/// Union bound on the ML block error probability of a channel code.
///
/// Over `F_2` each pairwise term is the exact probability that a codeword of weight
/// `d` scores at least as well as the transmitted one (ties counted as errors).
/// Other fields use the Bhattacharyya bound per coordinate.
pub fn union_bound(code: &LinearCode, noise: &Pmf) -> Result<f64, CodingError> {
    if code.kind != CodeKind::Channel {
        return Err(CodingError::WrongKind("channel"));
    }
    let field = code.field();
    let q = field.order() as usize;
    if noise.len() != q {
        return Err(CodingError::Dimension("noise pmf alphabet differs from field size"));
    }
    let k = code.input_len();
    check_search(field.order(), k)?;
    // per-symbol Bhattacharyya coefficient B(a) = Σ_z sqrt(P(z) P(z - a))
    let bhat: Vec<f64> = (0..q as u32)
        .map(|a| {
            (0..q as u32)
                .map(|z| sqrt(noise.prob(z as usize) * noise.prob(field.sub(z, a) as usize)))
                .sum()
        })
        .collect();
    let p1 = noise.prob(1);
    let mut w = vec![0u32; k];
    let mut total = 0.0;
    while let Some(j) = (0..k).rev().find(|&i| w[i] + 1 < q as u32) {
        for d in w.iter_mut().skip(j + 1) {
            *d = 0;
        }
        w[j] += 1;
        let c = code.gen.left_mul_vec(&w)?;
        total += if q == 2 {
            let d = c.iter().filter(|&&b| b == 1).count();
            if d == 0 {
                1.0
            } else {
                tail_at_least(d, d.div_ceil(2), p1)
            }
        } else {
            c.iter().map(|&a| bhat[a as usize]).product::<f64>()
        };
    }
    Ok(total)
}

/// Draws `candidates` random `k × n` channel codes and keeps the one with the
/// smallest [`union_bound`]; the first wins a tie.
pub fn select_by_union_bound<R: Rng + ?Sized>(
    field: PrimeField,
    k: usize,
    n: usize,
    noise: &Pmf,
    candidates: usize,
    rng: &mut R,
) -> Result<(LinearCode, f64), CodingError> {
    let mut best: Option<(LinearCode, f64)> = None;
    for _ in 0..candidates.max(1) {
        let code = random_linear_code(field, k, n, rng)?;
        let bound = union_bound(&code, noise)?;
        if best.as_ref().is_none_or(|(_, b)| bound < *b) {
            best = Some((code, bound));
        }
    }
    Ok(best.expect("at least one candidate"))
}

// ---------------------------------------------------------------------------
// Körner–Marton

fn require_binary_source(code: &LinearCode) -> Result<(), CodingError> {
    if code.kind != CodeKind::Source {
        return Err(CodingError::WrongKind("source"));
    }
    if code.field().order() != 2 {
        return Err(CodingError::NotBinary);
    }
    Ok(())
}

/// Syndrome `sH` of a length-`n` source block.
pub fn km_encode(code: &LinearCode, s: &[u32]) -> Result<Vec<u32>, CodingError> {
    if code.kind != CodeKind::Source {
        return Err(CodingError::WrongKind("source"));
    }
    code.encode(s)
}

/// Most likely `u` under i.i.d. Bernoulli(`p`) with `uH = syndrome`.
pub fn km_decode(code: &LinearCode, syndrome: &[u32], p: f64) -> Result<Vec<u32>, CodingError> {
    require_binary_source(code)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(InfoError::Domain(p).into());
    }
    let (n, m) = (code.gen.rows(), code.gen.cols());
    if syndrome.len() != m {
        return Err(CodingError::Dimension("syndrome length differs from code"));
    }
    if n > MAX_SYNDROME_BLOCK {
        return Err(CodingError::SearchTooLarge { hypotheses: 1u128 << n, limit: SEARCH_LIMIT });
    }
    if m > 64 {
        return Err(CodingError::Dimension("syndrome longer than 64 bits"));
    }
    let to_mask = |v: &[u32]| v.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((b as u64 & 1) << i));
    let rows: Vec<u64> = (0..n).map(|r| to_mask(code.gen.row(r))).collect();
    let target = to_mask(syndrome);
    let (l0, l1) = (ln(1.0 - p), ln(p));
    let score = |weight: u32| histogram_score(&[n as u32 - weight, weight], &[l0, l1]);

    let mut best: Option<(u64, f64)> = None;
    let mut synd = 0u64;
    for idx in 0..(1u64 << n) {
        if idx > 0 {
            let mut bits = idx ^ (idx - 1);
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                synd ^= rows[n - 1 - b];
                bits &= bits - 1;
            }
        }
        if synd != target {
            continue;
        }
        let s = score(idx.count_ones());
        match best {
            None => best = Some((idx, s)),
            Some((_, bs)) if s > bs => best = Some((idx, s)),
            _ => {}
        }
    }
    let (idx, _) = best.ok_or(CodingError::NoCandidate)?;
    Ok((0..n).map(|i| ((idx >> (n - 1 - i)) & 1) as u32).collect())
}

/// Rate region for one rate pair: either individual bounds only or individual plus
/// a sum-rate bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRegion {
    pub individual: f64,
    pub sum: Option<f64>,
}

impl RateRegion {
    /// Strict inequalities, as in the achievability statements.
    pub fn contains(&self, r1: f64, r2: f64) -> bool {
        r1 > self.individual && r2 > self.individual && self.sum.is_none_or(|s| r1 + r2 > s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmRegions {
    pub entropy: f64,
    /// Linear (syndrome) coding: `R1, R2 > h_B(p)`.
    pub structured: RateRegion,
    /// Random binning: additionally `R1 + R2 > 1 + h_B(p)`.
    pub binning: RateRegion,
}

pub fn km_baseline_region(p: f64) -> Result<KmRegions, InfoError> {
    let h = binary_entropy(p)?;
    Ok(KmRegions {
        entropy: h,
        structured: RateRegion { individual: h, sum: None },
        binning: RateRegion { individual: h, sum: Some(1.0 + h) },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmTrial {
    pub u: Vec<u32>,
    pub u_hat: Vec<u32>,
    pub syndrome_len: usize,
}

impl KmTrial {
    pub fn is_error(&self) -> bool {
        self.u != self.u_hat
    }
}

/// One Körner–Marton block: fresh random `H`, fresh correlated sources, both
/// syndromes XORed at the decoder.
pub fn km_trial<R: Rng + ?Sized>(n: usize, rate: f64, source: &XorSource, rng: &mut R) -> Result<KmTrial, CodingError> {
    let f2 = PrimeField::new(2)?;
    let code = random_source_code(f2, n, rate, rng)?;
    let (s1, s2): (Vec<u32>, Vec<u32>) = (0..n)
        .map(|_| {
            let (a, b) = source.sample(rng);
            (a as u32, b as u32)
        })
        .unzip();
    let w1 = km_encode(&code, &s1)?;
    let w2 = km_encode(&code, &s2)?;
    let syndrome = f2.add_vec(&w1, &w2);
    let u = f2.add_vec(&s1, &s2);
    let u_hat = km_decode(&code, &syndrome, source.flip)?;
    Ok(KmTrial { u, u_hat, syndrome_len: code.output_len() })
}

// ---------------------------------------------------------------------------
// Computation over a discrete linear MAC

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMacParams {
    pub field: PrimeField,
    /// Function coefficients α_j of `u = Σ α_j s_j`.
    pub alphas: Vec<u32>,
    /// Channel coefficients β_j of `y = Σ β_j x_j + z`; all nonzero.
    pub betas: Vec<u32>,
    pub noise: Pmf,
    /// Per-user source marginals; sources are independent across users.
    pub sources: Vec<Pmf>,
    /// Channel uses per block.
    pub n: usize,
    /// Source symbols per block.
    pub k: usize,
}

impl DiscreteMacParams {
    pub fn new(
        field: PrimeField,
        alphas: Vec<u32>,
        betas: Vec<u32>,
        noise: Pmf,
        sources: Vec<Pmf>,
        n: usize,
        k: usize,
    ) -> Result<Self, CodingError> {
        let users = alphas.len();
        if users == 0 || betas.len() != users || sources.len() != users {
            return Err(CodingError::Dimension("alphas, betas and sources need one entry per user"));
        }
        let q = field.order() as usize;
        for &a in alphas.iter().chain(&betas) {
            field.check(a)?;
        }
        if let Some(j) = betas.iter().position(|&b| b == 0) {
            return Err(CodingError::ZeroChannelCoefficient(j));
        }
        if noise.len() != q || sources.iter().any(|s| s.len() != q) {
            return Err(CodingError::Dimension("pmf alphabets must match the field size"));
        }
        if k == 0 || n == 0 {
            return Err(CodingError::Dimension("need n >= 1 and k >= 1"));
        }
        Ok(Self { field, alphas, betas, noise, sources, n, k })
    }

    /// `M` uniform independent users with `α = β = 1` at rate `⌈nR⌉/n`.
    pub fn uniform_sum(field: PrimeField, users: usize, noise: Pmf, n: usize, rate: f64) -> Result<Self, CodingError> {
        let q = field.order() as usize;
        let k = ceil_count(n, rate).max(1);
        Self::new(field, vec![1; users], vec![1; users], noise, vec![Pmf::uniform(q); users], n, k)
    }

    pub fn users(&self) -> usize {
        self.alphas.len()
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Law of `U = Σ α_j S_j` by convolution over `F_q`.
    pub fn sum_pmf(&self) -> Pmf {
        let q = self.field.order() as usize;
        let mut acc = vec![0.0; q];
        acc[0] = 1.0;
        for (src, &a) in self.sources.iter().zip(&self.alphas) {
            let mut next = vec![0.0; q];
            for (u, &pu) in acc.iter().enumerate() {
                if pu == 0.0 {
                    continue;
                }
                for (s, &ps) in src.probs().iter().enumerate() {
                    let v = self.field.add(u as u32, self.field.mul(a, s as u32)) as usize;
                    next[v] += pu * ps;
                }
            }
            acc = next;
        }
        let total: f64 = acc.iter().sum();
        Pmf::new(acc.into_iter().map(|p| p / total).collect()).expect("convolution of pmfs is a pmf")
    }

    pub fn sample_sources<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<u32>> {
        self.sources
            .iter()
            .map(|pmf| (0..self.k).map(|_| pmf.sample(rng) as u32).collect())
            .collect()
    }
}

/// Compression matrix `H` (`k × m`) and channel generator `G` (`m × n`).
#[derive(Debug, Clone, PartialEq)]
pub struct MacCode {
    pub h: FieldMatrix,
    pub g: FieldMatrix,
}

impl MacCode {
    pub fn random<R: Rng + ?Sized>(params: &DiscreteMacParams, m: usize, rng: &mut R) -> Self {
        Self {
            h: FieldMatrix::random(params.field, params.k, m, rng),
            g: FieldMatrix::random(params.field, m, params.n, rng),
        }
    }

    /// `H = I_k` with a random `G`; the natural choice for uniform `U`.
    pub fn uncompressed<R: Rng + ?Sized>(params: &DiscreteMacParams, rng: &mut R) -> Self {
        Self {
            h: FieldMatrix::identity(params.field, params.k),
            g: FieldMatrix::random(params.field, params.k, params.n, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacTrial {
    pub u: Vec<u32>,
    pub u_hat: Vec<u32>,
    /// Whether `Σ β_j x_j` came out exactly equal to `uHG`.
    pub noiseless_matches: bool,
    pub noiseless_output: Vec<u32>,
}

impl MacTrial {
    pub fn is_error(&self) -> bool {
        self.u != self.u_hat
    }
}

/// One block of computation over `y = Σ β_j x_j + z`.
pub fn discrete_mac_compute_trial<R: Rng + ?Sized>(
    params: &DiscreteMacParams,
    sources: &[Vec<u32>],
    h: &FieldMatrix,
    g: &FieldMatrix,
    rng: &mut R,
) -> Result<MacTrial, CodingError> {
    let f = params.field;
    if sources.len() != params.users() || sources.iter().any(|s| s.len() != params.k) {
        return Err(CodingError::Dimension("need one length-k source block per user"));
    }
    if h.field() != f || g.field() != f {
        return Err(GfError::FieldMismatch.into());
    }
    if h.rows() != params.k || h.cols() != g.rows() || g.cols() != params.n {
        return Err(CodingError::Dimension("H must be k x m and G must be m x n"));
    }
    check_search(f.order(), params.k)?;
    let hg = h.mul(g)?;

    let mut y = vec![0u32; params.n];
    let mut u = vec![0u32; params.k];
    for ((s, &a), &b) in sources.iter().zip(&params.alphas).zip(&params.betas) {
        let scale = f.mul(f.inverse(b)?, a);
        let x = hg.left_mul_vec(&f.scale_vec(scale, s))?;
        y = f.add_vec(&y, &f.scale_vec(b, &x));
        u = f.add_vec(&u, &f.scale_vec(a, s));
    }
    let noiseless_matches = y == hg.left_mul_vec(&u)?;
    let noiseless_output = y.clone();
    for yi in y.iter_mut() {
        *yi = f.add(*yi, params.noise.sample(rng) as u32);
    }
    let prior = params.sum_pmf();
    let u_hat = exhaustive_map(&hg, &y, &params.noise, Some(&prior));
    Ok(MacTrial { u, u_hat, noiseless_matches, noiseless_output })
}

/// Fresh sources and a fresh uncompressed code, then one trial.
pub fn discrete_mac_random_trial<R: Rng + ?Sized>(params: &DiscreteMacParams, rng: &mut R) -> Result<MacTrial, CodingError> {
    let code = MacCode::uncompressed(params, rng);
    let sources = params.sample_sources(rng);
    discrete_mac_compute_trial(params, &sources, &code.h, &code.g, rng)
}
