//! Computing the sum of Gaussian sources over a Gaussian MAC with dithered
//! lattice refinement.
//!
//! Each of `M` users sees `S_j ~ N(0, σ²)` and the receiver wants `u = Σ s_j`
//! from `y = Σ x_j + z`. Every block of `k` source symbols gets `n = ℓk` channel
//! uses: `k` uncoded uses give the MMSE estimate, then each of the `ℓ − 1`
//! refinement stages sends `x_j = [γ s_j + d_j] mod Λ / √M` with `Λ` of second
//! moment `MP`. The decoder forms
//!
//! ```text
//! t = α y − Σ d_j − γ û,   r = [t] mod Λ = [(α/√M − 1) Σ v_j + α z + γ (u − û)] mod Λ
//! ```
//!
//! and updates `û ← û + β r`. Each stage multiplies the residual variance by
//! `ρ = MN/(N + MP)`.
//!
//! Two modes are available. [`Mode::Ideal`] uses a scaled integer lattice for the
//! encoders and grants the modulo recovery (it uses the unwrapped expression for
//! `r`), counting the blocks where a real decoder would have wrapped.
//! [`Mode::Concrete`] decodes with the supplied low-dimensional lattice, so wraps
//! show up as extra distortion.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{Lattice, LatticeError};
use crate::math::{log2, powi, sqrt};
use crate::stats::{gaussian_vec, mse};

/// Default relative offset of `γ` below its limit `γ₀`.
pub const DEFAULT_EPS_GAMMA: f64 = 1e-6;

/// Seed of the private RNG used to rescale non-diagonal lattices.
const SCALING_SEED: u64 = 0x5ca1e;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GaussianError {
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("second-moment condition fails: {lhs} > {bound}")]
    PowerConditionViolated { lhs: f64, bound: f64 },
    #[error("concrete mode needs a lattice")]
    LatticeRequired,
    #[error("common-randomness variance for user {user} is negative ({var})")]
    VarianceMismatch { user: usize, var: f64 },
    #[error("distortion {0} outside (0, σ²]")]
    Domain(f64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMacParams {
    pub users: usize,
    /// Per-user power.
    pub power: f64,
    /// Channel noise variance.
    pub noise: f64,
    pub sigma_s2: f64,
    /// Source block length.
    pub k: usize,
    /// Channel uses per source symbol.
    pub ell: usize,
}

impl GaussianMacParams {
    pub fn validate(&self) -> Result<(), GaussianError> {
        if self.users == 0 {
            return Err(GaussianError::InvalidParams("need at least one user"));
        }
        if !(self.power > 0.0 && self.noise > 0.0 && self.sigma_s2 > 0.0) {
            return Err(GaussianError::InvalidParams("power, noise and source variance must be positive"));
        }
        if self.k == 0 || self.ell == 0 {
            return Err(GaussianError::InvalidParams("k and ell must be at least 1"));
        }
        Ok(())
    }

    fn mp(&self) -> f64 {
        self.users as f64 * self.power
    }

    /// Per-stage contraction `MN/(N + MP)`.
    pub fn rho(&self) -> f64 {
        self.users as f64 * self.noise / (self.noise + self.mp())
    }

    /// Residual variance after the uncoded phase, `Mσ²N/(N + MP)`.
    pub fn sigma_q2(&self) -> f64 {
        self.users as f64 * self.sigma_s2 * self.noise / (self.noise + self.mp())
    }

    /// Predicted distortion `σ_Q² ρ^(ℓ−1)`.
    pub fn predicted_mse(&self) -> f64 {
        self.sigma_q2() * powi(self.rho(), self.ell as i32 - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConstants {
    pub alpha: f64,
    pub gamma: f64,
    pub gamma0: f64,
    pub beta: f64,
    pub sigma_q2: f64,
    pub rho: f64,
}

/// Second moment of the effective noise before the mod:
/// `(α/√M − 1)² M²P + α² N + γ² σ²`.
pub fn effective_second_moment(p: &GaussianMacParams, alpha: f64, gamma: f64, residual_var: f64) -> f64 {
    let m = p.users as f64;
    let a = alpha / sqrt(m) - 1.0;
    a * a * m * m * p.power + alpha * alpha * p.noise + gamma * gamma * residual_var
}

/// `γ₀` and the stage constants for a residual variance `residual_var`.
fn stage_constants(p: &GaussianMacParams, residual_var: f64, eps_gamma: f64) -> Result<(f64, f64, f64), GaussianError> {
    let mp = p.mp();
    let alpha = mp * sqrt(p.users as f64) / (mp + p.noise);
    let gamma0_sq = mp * (1.0 - p.rho()) / residual_var;
    if !(gamma0_sq > 0.0) {
        // happens when P < N(M − 1)/M: no γ satisfies the second-moment condition
        return Err(GaussianError::PowerConditionViolated {
            lhs: effective_second_moment(p, alpha, 0.0, residual_var),
            bound: mp,
        });
    }
    let gamma0 = sqrt(gamma0_sq);
    let gamma = (1.0 - eps_gamma) * gamma0;
    let lhs = effective_second_moment(p, alpha, gamma, residual_var);
    if lhs > mp * (1.0 + 1e-12) {
        return Err(GaussianError::PowerConditionViolated { lhs, bound: mp });
    }
    Ok((gamma0, gamma, residual_var * gamma / mp))
}

/// Constants for the first refinement stage.
pub fn derive_constants(p: &GaussianMacParams, eps_gamma: f64) -> Result<SchemeConstants, GaussianError> {
    p.validate()?;
    if !(0.0..1.0).contains(&eps_gamma) {
        return Err(GaussianError::InvalidParams("eps_gamma must lie in [0, 1)"));
    }
    let sigma_q2 = p.sigma_q2();
    let mp = p.mp();
    let alpha = mp * sqrt(p.users as f64) / (mp + p.noise);
    let (gamma0, gamma, beta) = stage_constants(p, sigma_q2, eps_gamma)?;
    Ok(SchemeConstants { alpha, gamma, gamma0, beta, sigma_q2, rho: p.rho() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ideal,
    Concrete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOptions {
    pub mode: Mode,
    /// Lattice shape for concrete mode; rescaled to second moment `MP`.
    pub lattice: Option<Lattice>,
    pub eps_gamma: f64,
    /// Draw all dithers from this seed instead of the trial RNG, so every trial
    /// uses the same fixed dither vectors.
    pub frozen_dither_seed: Option<u64>,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self { mode: Mode::Ideal, lattice: None, eps_gamma: DEFAULT_EPS_GAMMA, frozen_dither_seed: None }
    }
}

impl SchemeOptions {
    pub fn concrete(lattice: Lattice) -> Self {
        Self { mode: Mode::Concrete, lattice: Some(lattice), ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementOutcome {
    pub u: Vec<f64>,
    pub u_hat: Vec<f64>,
    pub empirical_mse: f64,
    pub predicted_mse: f64,
    /// Empirical MSE after the uncoded phase and after each refinement stage.
    pub stage_mse: Vec<f64>,
    /// Lattice blocks where `[t] mod Λ` differs from the unwrapped expression.
    pub wrap_events: usize,
    /// Average transmit power of each user over all `ℓk` uses.
    pub user_power: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Stage {
    gamma: f64,
    beta: f64,
}

/// A prepared scheme: constants for every stage and the lattice in use.
#[derive(Debug, Clone)]
pub struct RefinementScheme {
    params: GaussianMacParams,
    constants: SchemeConstants,
    stages: Vec<Stage>,
    lattice: Lattice,
    mode: Mode,
    frozen_dither_seed: Option<u64>,
}

impl RefinementScheme {
    pub fn new(params: GaussianMacParams, options: &SchemeOptions) -> Result<Self, GaussianError> {
        let constants = derive_constants(&params, options.eps_gamma)?;
        let mp = params.mp();
        let mut stages = Vec::with_capacity(params.ell.saturating_sub(1));
        let mut residual = constants.sigma_q2;
        for _ in 1..params.ell {
            let (_, gamma, beta) = stage_constants(&params, residual, options.eps_gamma)?;
            stages.push(Stage { gamma, beta });
            residual *= constants.rho;
        }
        let lattice = match options.mode {
            Mode::Ideal => Lattice::cubic(1, sqrt(12.0 * mp))?,
            Mode::Concrete => {
                let shape = options.lattice.as_ref().ok_or(GaussianError::LatticeRequired)?;
                if !params.k.is_multiple_of(shape.dim()) {
                    return Err(GaussianError::InvalidParams("k must be a multiple of the lattice dimension"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(SCALING_SEED);
                shape.scale_to_second_moment(mp, &mut rng)?
            }
        };
        Ok(Self { params, constants, stages, lattice, mode: options.mode, frozen_dither_seed: options.frozen_dither_seed })
    }

    pub fn params(&self) -> &GaussianMacParams {
        &self.params
    }

    pub fn constants(&self) -> &SchemeConstants {
        &self.constants
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// `dithers[stage][user]`, each of length `k`.
    pub fn draw_dithers<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<Vec<f64>>> {
        let draw = |rng: &mut dyn rand::RngCore| {
            (0..self.stages.len())
                .map(|_| {
                    (0..self.params.users)
                        .map(|_| self.lattice.sample_dither_blocks(self.params.k, rng).expect("k checked against dimension"))
                        .collect()
                })
                .collect()
        };
        match self.frozen_dither_seed {
            Some(seed) => draw(&mut ChaCha8Rng::seed_from_u64(seed)),
            None => {
                let mut local = ChaCha8Rng::seed_from_u64(rng.random());
                draw(&mut local)
            }
        }
    }

    /// One block with fresh sources, dithers and noise.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RefinementOutcome, GaussianError> {
        let sources: Vec<Vec<f64>> =
            (0..self.params.users).map(|_| gaussian_vec(rng, self.params.k, self.params.sigma_s2)).collect();
        let dithers = self.draw_dithers(rng);
        self.run_with(&sources, &dithers, rng)
    }

    /// One block with the given sources and dithers; `rng` supplies channel noise.
    pub fn run_with<R: Rng + ?Sized>(
        &self,
        sources: &[Vec<f64>],
        dithers: &[Vec<Vec<f64>>],
        rng: &mut R,
    ) -> Result<RefinementOutcome, GaussianError> {
        let p = &self.params;
        let (m, k) = (p.users, p.k);
        if sources.len() != m || sources.iter().any(|s| s.len() != k) {
            return Err(GaussianError::InvalidParams("need one length-k source block per user"));
        }
        if dithers.len() != self.stages.len() || dithers.iter().any(|d| d.len() != m || d.iter().any(|v| v.len() != k)) {
            return Err(GaussianError::InvalidParams("need one length-k dither per user and stage"));
        }
        let sqrt_m = sqrt(m as f64);
        let u: Vec<f64> = (0..k).map(|i| sources.iter().map(|s| s[i]).sum()).collect();
        let mut energy = vec![0.0; m];

        // uncoded phase
        let gain = sqrt(p.power / p.sigma_s2);
        let z = gaussian_vec(rng, k, p.noise);
        let mmse = m as f64 * sqrt(p.power * p.sigma_s2) / (p.mp() + p.noise);
        let mut u_hat: Vec<f64> = (0..k)
            .map(|i| {
                let mut y = z[i];
                for (j, s) in sources.iter().enumerate() {
                    let x = gain * s[i];
                    energy[j] += x * x;
                    y += x;
                }
                mmse * y
            })
            .collect();
        let mut stage_mse = vec![mse(&u, &u_hat)];
        let mut wrap_events = 0;

        let alpha = self.constants.alpha;
        for (stage, d) in self.stages.iter().zip(dithers) {
            let mut v_sum = vec![0.0; k];
            let mut d_sum = vec![0.0; k];
            for (j, s) in sources.iter().enumerate() {
                let pre: Vec<f64> = s.iter().zip(&d[j]).map(|(si, di)| stage.gamma * si + di).collect();
                let v = self.lattice.mod_blocks(&pre)?;
                for i in 0..k {
                    let x = v[i] / sqrt_m;
                    energy[j] += x * x;
                    v_sum[i] += v[i];
                    d_sum[i] += d[j][i];
                }
            }
            let z = gaussian_vec(rng, k, p.noise);
            let t: Vec<f64> = (0..k)
                .map(|i| {
                    let y = v_sum[i] / sqrt_m + z[i];
                    alpha * y - d_sum[i] - stage.gamma * u_hat[i]
                })
                .collect();
            let wrapped = self.lattice.mod_blocks(&t)?;
            let unwrapped: Vec<f64> = (0..k)
                .map(|i| (alpha / sqrt_m - 1.0) * v_sum[i] + alpha * z[i] + stage.gamma * (u[i] - u_hat[i]))
                .collect();
            let n = self.lattice.dim();
            wrap_events += wrapped
                .chunks(n)
                .zip(unwrapped.chunks(n))
                .filter(|(a, b)| a.iter().zip(*b).any(|(x, y)| (x - y).abs() > 1e-9 * (1.0 + y.abs())))
                .count();
            let r = match self.mode {
                Mode::Ideal => unwrapped,
                Mode::Concrete => wrapped,
            };
            for i in 0..k {
                u_hat[i] += stage.beta * r[i];
            }
            stage_mse.push(mse(&u, &u_hat));
        }
        let uses = (p.ell * k) as f64;
        Ok(RefinementOutcome {
            empirical_mse: mse(&u, &u_hat),
            predicted_mse: p.predicted_mse(),
            stage_mse,
            wrap_events,
            user_power: energy.into_iter().map(|e| e / uses).collect(),
            u,
            u_hat,
        })
    }
}

/// Prepare and run one block of the refinement scheme.
pub fn refinement_pipeline<R: Rng + ?Sized>(
    params: &GaussianMacParams,
    options: &SchemeOptions,
    rng: &mut R,
) -> Result<RefinementOutcome, GaussianError> {
    RefinementScheme::new(*params, options)?.run(rng)
}

/// `(1/2ℓ) log₂(σ²/D)`, the rate carried by describing a variance-`σ²` source
/// at distortion `D` over `ℓ` uses per sample.
pub fn rate_from_distortion(sigma_s2: f64, d: f64, ell: usize) -> Result<f64, GaussianError> {
    if !(d > 0.0 && d <= sigma_s2) {
        return Err(GaussianError::Domain(d));
    }
    if ell == 0 {
        return Err(GaussianError::InvalidParams("ell must be at least 1"));
    }
    Ok(log2(sigma_s2 / d) / (2.0 * ell as f64))
}

// ---------------------------------------------------------------------------
// Integer-coefficient linear functions

#[derive(Debug, Clone, PartialEq)]
pub struct CommonRandomness {
    /// `(q−1)² σ_MAX² − β_j² σ_j²`.
    pub w_vars: Vec<f64>,
    pub w_values: Vec<Vec<f64>>,
}

impl CommonRandomness {
    pub fn variances(q: u32, betas: &[u32], source_vars: &[f64]) -> Result<(f64, Vec<f64>), GaussianError> {
        let sigma_max2 = source_vars.iter().copied().fold(0.0, f64::max);
        let design = powi(f64::from(q - 1), 2) * sigma_max2;
        let mut w = Vec::with_capacity(betas.len());
        for (user, (&b, &s2)) in betas.iter().zip(source_vars).enumerate() {
            let var = design - f64::from(b) * f64::from(b) * s2;
            if var < -1e-12 * design.max(1.0) {
                return Err(GaussianError::VarianceMismatch { user, var });
            }
            w.push(var.max(0.0));
        }
        Ok((design, w))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFunctionOutcome {
    pub u: Vec<f64>,
    pub u_hat: Vec<f64>,
    pub empirical_mse: f64,
    /// `σ_T-design` recursion of the refinement scheme on `Σ T_j`.
    pub predicted_recursion: f64,
    /// Closed-form bound `J (q−1)² σ_MAX² (JN/(N+P))^ℓ`.
    pub predicted_bound: f64,
    pub common: CommonRandomness,
    pub wrap_events: usize,
}

/// `J (q−1)² σ_MAX² (JN/(N+P))^ℓ`.
pub fn linear_function_bound(j: usize, q: u32, sigma_max2: f64, power: f64, noise: f64, ell: usize) -> f64 {
    let jf = j as f64;
    jf * powi(f64::from(q - 1), 2) * sigma_max2 * powi(jf * noise / (noise + power), ell as i32)
}

/// Estimate `U = Σ β_j S_j`: encoder `j` runs the refinement scheme on
/// `T_j = β_j S_j + W_j`, all designed for variance `(q−1)² σ_MAX²`, and the
/// decoder subtracts the common randomness `Σ W_j` from its estimate of `Σ T_j`.
///
/// `params.users`, `power`, `noise`, `k` and `ell` are used; the source variance
/// is replaced by the design variance.
pub fn linear_function_pipeline<R: Rng + ?Sized>(
    params: &GaussianMacParams,
    q: u32,
    betas: &[u32],
    source_vars: &[f64],
    options: &SchemeOptions,
    rng: &mut R,
) -> Result<LinearFunctionOutcome, GaussianError> {
    let j = params.users;
    if betas.len() != j || source_vars.len() != j {
        return Err(GaussianError::InvalidParams("need one coefficient and one variance per user"));
    }
    if q < 2 || betas.iter().any(|&b| b >= q) {
        return Err(GaussianError::InvalidParams("coefficients must lie in [0, q)"));
    }
    if source_vars.iter().any(|&v| !(v > 0.0)) {
        return Err(GaussianError::InvalidParams("source variances must be positive"));
    }
    let (design, w_vars) = CommonRandomness::variances(q, betas, source_vars)?;
    let inner = GaussianMacParams { sigma_s2: design, ..*params };
    let scheme = RefinementScheme::new(inner, options)?;

    let k = params.k;
    let s: Vec<Vec<f64>> = source_vars.iter().map(|&v| gaussian_vec(rng, k, v)).collect();
    let w_values: Vec<Vec<f64>> = w_vars.iter().map(|&v| gaussian_vec(rng, k, v)).collect();
    let t: Vec<Vec<f64>> = (0..j)
        .map(|u| (0..k).map(|i| f64::from(betas[u]) * s[u][i] + w_values[u][i]).collect())
        .collect();
    let dithers = scheme.draw_dithers(rng);
    let out = scheme.run_with(&t, &dithers, rng)?;

    let u: Vec<f64> = (0..k).map(|i| (0..j).map(|x| f64::from(betas[x]) * s[x][i]).sum()).collect();
    let u_hat: Vec<f64> = (0..k).map(|i| out.u_hat[i] - w_values.iter().map(|w| w[i]).sum::<f64>()).collect();
    let sigma_max2 = source_vars.iter().copied().fold(0.0, f64::max);
    Ok(LinearFunctionOutcome {
        empirical_mse: mse(&u, &u_hat),
        predicted_recursion: inner.predicted_mse(),
        predicted_bound: linear_function_bound(j, q, sigma_max2, params.power, params.noise, params.ell),
        common: CommonRandomness { w_vars, w_values },
        wrap_events: out.wrap_events,
        u,
        u_hat,
    })
}

// ---------------------------------------------------------------------------
// Two-relay sum/difference network

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayParams {
    pub power: f64,
    pub noise: f64,
    /// Capacity of each relay-to-destination link, bits per use.
    pub r0: f64,
    pub sigma_s2: f64,
    pub k: usize,
    pub ell: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelayOutcome {
    /// Empirical distortion of the sum and difference at the relays.
    pub d_u: f64,
    pub d_v: f64,
    /// Empirical distortion of the two sources at the destination.
    pub d_s1: f64,
    pub d_s2: f64,
    /// `σ²(2N/(N+2P))^ℓ`.
    pub d_relay: f64,
    /// `σ_S²`-scaled requantization distortion `2σ² 2^(−2ℓR₀)`.
    pub d0: f64,
    /// `max(4 d_relay, 2 d0)`.
    pub distortion_bound: f64,
    /// Rate implied by `distortion_bound`.
    pub achievable_rate: f64,
    /// Rate implied by the worse empirical source distortion, if in range.
    pub empirical_rate: Option<f64>,
    pub wrap_events: usize,
}

/// `max(4σ²(2N/(N+2P))^ℓ, 2·2σ² 2^(−2ℓR₀))`.
pub fn relay_distortion_bound(p: &RelayParams) -> (f64, f64, f64) {
    let d = p.sigma_s2 * powi(2.0 * p.noise / (p.noise + 2.0 * p.power), p.ell as i32);
    let d0 = 2.0 * p.sigma_s2 * crate::math::exp2(-2.0 * p.ell as f64 * p.r0);
    (d, d0, (4.0 * d).max(2.0 * d0))
}

/// Relay 1 sees `X₁ + X₂ + Z₁` and estimates `u = s₁ + s₂`; relay 2 sees
/// `X₁ − X₂ + Z₂` and estimates `v = s₁ − s₂` from the same transmissions (user 2's
/// signal arrives negated, so relay 2 effectively runs the scheme on `(s₁, −s₂)`
/// with dithers `(d₁, −d₂)`). Each relay requantizes its estimate to distortion
/// `D₀` and the destination outputs `(ũ ± ṽ)/2`.
///
/// Ideal mode models requantization as additive independent error of variance
/// `D₀`; concrete mode quantizes with a scaled integer lattice of matching cell
/// size.
pub fn sum_difference_relay_pipeline<R: Rng + ?Sized>(
    p: &RelayParams,
    options: &SchemeOptions,
    rng: &mut R,
) -> Result<RelayOutcome, GaussianError> {
    if !(p.r0 > 0.0) {
        return Err(GaussianError::InvalidParams("relay link capacity must be positive"));
    }
    let mac = GaussianMacParams { users: 2, power: p.power, noise: p.noise, sigma_s2: p.sigma_s2, k: p.k, ell: p.ell };
    let scheme = RefinementScheme::new(mac, options)?;
    let s1 = gaussian_vec(rng, p.k, p.sigma_s2);
    let s2 = gaussian_vec(rng, p.k, p.sigma_s2);
    let dithers = scheme.draw_dithers(rng);
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<f64>>();
    let diff_dithers: Vec<Vec<Vec<f64>>> = dithers.iter().map(|d| vec![d[0].clone(), neg(&d[1])]).collect();

    let sum_out = scheme.run_with(&[s1.clone(), s2.clone()], &dithers, rng)?;
    let diff_out = scheme.run_with(&[s1.clone(), neg(&s2)], &diff_dithers, rng)?;

    let (d_relay, d0, bound) = relay_distortion_bound(p);
    let requantize = |x: &[f64], rng: &mut R| -> Result<Vec<f64>, GaussianError> {
        if d0 == 0.0 {
            return Ok(x.to_vec());
        }
        match options.mode {
            Mode::Ideal => {
                let e = gaussian_vec(rng, x.len(), d0);
                Ok(x.iter().zip(&e).map(|(a, b)| a + b).collect())
            }
            Mode::Concrete => {
                let step = sqrt(12.0 * d0);
                let q = Lattice::cubic(1, step)?;
                let dither = q.sample_dither_blocks(x.len(), rng)?;
                let shifted: Vec<f64> = x.iter().zip(&dither).map(|(a, b)| a + b).collect();
                let pts = q.nearest_point_blocks(&shifted)?;
                Ok(pts.iter().zip(&dither).map(|(a, b)| a - b).collect())
            }
        }
    };
    let u_t = requantize(&sum_out.u_hat, rng)?;
    let v_t = requantize(&diff_out.u_hat, rng)?;
    let s1_hat: Vec<f64> = u_t.iter().zip(&v_t).map(|(a, b)| 0.5 * (a + b)).collect();
    let s2_hat: Vec<f64> = u_t.iter().zip(&v_t).map(|(a, b)| 0.5 * (a - b)).collect();
    let d_s1 = mse(&s1, &s1_hat);
    let d_s2 = mse(&s2, &s2_hat);
    Ok(RelayOutcome {
        d_u: sum_out.empirical_mse,
        d_v: diff_out.empirical_mse,
        d_s1,
        d_s2,
        d_relay,
        d0,
        distortion_bound: bound,
        achievable_rate: log2(p.sigma_s2 / bound) / (2.0 * p.ell as f64),
        empirical_rate: rate_from_distortion(p.sigma_s2, d_s1.max(d_s2), p.ell).ok(),
        wrap_events: sum_out.wrap_events + diff_out.wrap_events,
    })
}
