//! Lattices `Λ = {zG : z ∈ Zⁿ}` given by a real generator matrix.
//!
//! Points are row vectors and the rows of `G` form the basis. Diagonal generators
//! are quantized componentwise (ties to even); general generators of dimension at
//! most [`MAX_ENUM_DIM`] are quantized by enumerating integer coordinates in a box
//! that provably contains the nearest point.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::{ceil, floor, round_half_even, sqrt};

/// Largest dimension handled by the general (non-diagonal) quantizer.
pub const MAX_ENUM_DIM: usize = 8;
/// Cap on the number of integer vectors visited per quantization.
pub const MAX_ENUM_POINTS: u64 = 1 << 20;
/// Fewest dithers accepted by [`Lattice::second_moment`].
pub const MIN_MOMENT_SAMPLES: usize = 10_000;
/// Dithers used when a general lattice has to be rescaled.
pub const SCALE_SAMPLES: usize = 200_000;

const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatticeError {
    #[error("dimension error: {0}")]
    Dimension(&'static str),
    #[error("generator matrix is singular")]
    Singular,
    #[error("nearest-point search would visit {points} integer vectors")]
    EnumerationTooLarge { points: u64 },
    #[error("target second moment must be positive, got {0}")]
    NonPositiveTarget(f64),
    #[error("second moment needs at least {min} samples, got {samples}")]
    TooFewSamples { samples: usize, min: usize },
    #[error("coarse lattice is not contained in the fine lattice")]
    NotNested,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    dim: usize,
    gen: Vec<f64>,
    gen_inv: Vec<f64>,
    diagonal: bool,
}

fn invert(n: usize, m: &[f64]) -> Result<(Vec<f64>, f64), LatticeError> {
    // Gauss-Jordan with partial pivoting; returns the inverse and the determinant
    let mut a = m.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r1, &r2| a[r1 * n + col].abs().total_cmp(&a[r2 * n + col].abs()))
            .unwrap();
        let pv = a[piv * n + col];
        if pv.abs() < SINGULAR_TOL {
            return Err(LatticeError::Singular);
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
                inv.swap(piv * n + c, col * n + c);
            }
            det = -det;
        }
        det *= pv;
        for c in 0..n {
            a[col * n + c] /= pv;
            inv[col * n + c] /= pv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f != 0.0 {
                for c in 0..n {
                    a[r * n + c] -= f * a[col * n + c];
                    inv[r * n + c] -= f * inv[col * n + c];
                }
            }
        }
    }
    Ok((inv, det))
}

fn row_times(n: usize, x: &[f64], m: &[f64]) -> Vec<f64> {
    (0..n).map(|c| (0..n).map(|r| x[r] * m[r * n + c]).sum()).collect()
}

impl Lattice {
    /// Lattice with the given row-major `n × n` generator.
    pub fn new(dim: usize, gen: Vec<f64>) -> Result<Self, LatticeError> {
        if dim == 0 || gen.len() != dim * dim {
            return Err(LatticeError::Dimension("generator must be a non-empty square matrix"));
        }
        if gen.iter().any(|v| !v.is_finite()) {
            return Err(LatticeError::Dimension("generator entries must be finite"));
        }
        let (gen_inv, det) = invert(dim, &gen)?;
        if det.abs() <= SINGULAR_TOL {
            return Err(LatticeError::Singular);
        }
        let diagonal = (0..dim).all(|r| (0..dim).all(|c| r == c || gen[r * dim + c] == 0.0));
        Ok(Self { dim, gen, gen_inv, diagonal })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, LatticeError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LatticeError::Dimension("generator must be square"));
        }
        Self::new(n, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    /// `scale · Zⁿ`.
    pub fn cubic(dim: usize, scale: f64) -> Result<Self, LatticeError> {
        let mut gen = vec![0.0; dim * dim];
        for i in 0..dim {
            gen[i * dim + i] = scale;
        }
        Self::new(dim, gen)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self) -> &[f64] {
        &self.gen
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    /// `|det G|`, the volume of a fundamental cell.
    pub fn volume(&self) -> f64 {
        invert(self.dim, &self.gen).map(|(_, d)| d.abs()).unwrap_or(0.0)
    }

    /// The lattice `cΛ`.
    pub fn scaled(&self, c: f64) -> Result<Self, LatticeError> {
        Self::new(self.dim, self.gen.iter().map(|v| v * c).collect())
    }

    /// `zG`.
    pub fn point(&self, z: &[i64]) -> Vec<f64> {
        let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
        row_times(self.dim, &zf, &self.gen)
    }

    /// Real coordinates `x G⁻¹`.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        row_times(self.dim, x, &self.gen_inv)
    }

    fn check_len(&self, x: &[f64]) -> Result<(), LatticeError> {
        if x.len() != self.dim {
            return Err(LatticeError::Dimension("vector length differs from lattice dimension"));
        }
        Ok(())
    }

    /// Integer coordinates of the nearest lattice point.
    pub fn nearest_coords(&self, x: &[f64]) -> Result<Vec<i64>, LatticeError> {
        self.check_len(x)?;
        let n = self.dim;
        if self.diagonal {
            return Ok((0..n).map(|i| round_half_even(x[i] / self.gen[i * n + i]) as i64).collect());
        }
        if n > MAX_ENUM_DIM {
            return Err(LatticeError::Dimension("general lattices are limited to 8 dimensions"));
        }
        let c = self.coordinates(x);
        let babai: Vec<i64> = c.iter().map(|&v| round_half_even(v) as i64).collect();
        let d0 = dist2(x, &self.point(&babai));
        // |z_i - c_i| = |((zG - x) G⁻¹)_i| <= ‖zG - x‖ · ‖column i of G⁻¹‖
        let radius = sqrt(d0) * (1.0 + 1e-9) + 1e-12;
        let mut lo = vec![0i64; n];
        let mut hi = vec![0i64; n];
        let mut count: u64 = 1;
        for i in 0..n {
            let col_norm = sqrt((0..n).map(|r| self.gen_inv[r * n + i] * self.gen_inv[r * n + i]).sum());
            let r = radius * col_norm;
            lo[i] = ceil(c[i] - r) as i64;
            hi[i] = floor(c[i] + r) as i64;
            let width = (hi[i] - lo[i] + 1).max(1) as u64;
            count = count.saturating_mul(width);
        }
        if count > MAX_ENUM_POINTS {
            return Err(LatticeError::EnumerationTooLarge { points: count });
        }
        let mut z = lo.clone();
        let mut best = babai.clone();
        let mut best_d = f64::INFINITY;
        loop {
            let d = dist2(x, &self.point(&z));
            if d < best_d {
                best_d = d;
                best.copy_from_slice(&z);
            }
            let Some(j) = (0..n).rev().find(|&i| z[i] < hi[i]) else {
                break;
            };
            z[j] += 1;
            z[j + 1..].copy_from_slice(&lo[j + 1..]);
        }
        Ok(best)
    }

    /// Nearest lattice point `Q(x)`.
    pub fn nearest_point(&self, x: &[f64]) -> Result<Vec<f64>, LatticeError> {
        let z = self.nearest_coords(x)?;
        Ok(self.point(&z))
    }

    /// `x − Q(x)`, a point of the Voronoi cell around the origin.
    pub fn mod_lattice(&self, x: &[f64]) -> Result<Vec<f64>, LatticeError> {
        let q = self.nearest_point(x)?;
        Ok(x.iter().zip(&q).map(|(a, b)| a - b).collect())
    }

    /// Whether `x` lies in Λ up to `tol` in each coordinate.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim && self.coordinates(x).iter().all(|c| (c - round_half_even(*c)).abs() <= tol)
    }

    /// Uniform dither on the Voronoi cell, by sampling the fundamental
    /// parallelepiped and reducing mod Λ.
    pub fn sample_dither<R: Rng + ?Sized>(&self, rng: &mut R) -> DitherVector {
        let u: Vec<f64> = (0..self.dim).map(|_| rng.random::<f64>()).collect();
        let x = row_times(self.dim, &u, &self.gen);
        let values = self.mod_lattice(&x).expect("parallelepiped point has matching dimension and bounded search");
        DitherVector { values }
    }

    /// Monte Carlo estimate of `(1/n) E‖d‖²` for a uniform dither `d`.
    pub fn second_moment<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Result<SecondMoment, LatticeError> {
        if samples < MIN_MOMENT_SAMPLES {
            return Err(LatticeError::TooFewSamples { samples, min: MIN_MOMENT_SAMPLES });
        }
        let n = self.dim as f64;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..samples {
            let d = self.sample_dither(rng);
            let v = d.values.iter().map(|x| x * x).sum::<f64>() / n;
            s += v;
            s2 += v * v;
        }
        let m = samples as f64;
        let mean = s / m;
        let var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
        Ok(SecondMoment { per_dim: mean, std_err: sqrt(var / m), samples })
    }

    /// Exact second moment for diagonal generators: `(1/n) Σ g_ii² / 12`.
    pub fn cubic_second_moment(&self) -> Option<f64> {
        self.diagonal
            .then(|| (0..self.dim).map(|i| self.gen[i * self.dim + i] * self.gen[i * self.dim + i] / 12.0).sum::<f64>() / self.dim as f64)
    }

    /// `cΛ` with `c = sqrt(target / current)`. Diagonal generators use the exact
    /// moment, others a [`SCALE_SAMPLES`]-dither estimate.
    pub fn scale_to_second_moment<R: Rng + ?Sized>(&self, target: f64, rng: &mut R) -> Result<Self, LatticeError> {
        Ok(self.scale_factor_for(target, rng)?.1)
    }

    /// Like [`Self::scale_to_second_moment`], also returning the factor `c`.
    pub fn scale_factor_for<R: Rng + ?Sized>(&self, target: f64, rng: &mut R) -> Result<(f64, Self), LatticeError> {
        if !(target > 0.0) || !target.is_finite() {
            return Err(LatticeError::NonPositiveTarget(target));
        }
        let current = match self.cubic_second_moment() {
            Some(m) => m,
            None => self.second_moment(SCALE_SAMPLES, rng)?.per_dim,
        };
        let c = sqrt(target / current);
        Ok((c, self.scaled(c)?))
    }

    /// [`Self::nearest_point`] applied to consecutive length-`n` blocks.
    pub fn nearest_point_blocks(&self, x: &[f64]) -> Result<Vec<f64>, LatticeError> {
        if !x.len().is_multiple_of(self.dim) {
            return Err(LatticeError::Dimension("length is not a multiple of the lattice dimension"));
        }
        let mut out = Vec::with_capacity(x.len());
        for block in x.chunks(self.dim) {
            out.extend(self.nearest_point(block)?);
        }
        Ok(out)
    }

    /// [`Self::mod_lattice`] applied to consecutive length-`n` blocks.
    pub fn mod_blocks(&self, x: &[f64]) -> Result<Vec<f64>, LatticeError> {
        let q = self.nearest_point_blocks(x)?;
        Ok(x.iter().zip(&q).map(|(a, b)| a - b).collect())
    }

    /// Concatenated dithers covering `len` coordinates (`len` a multiple of `n`).
    pub fn sample_dither_blocks<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Result<Vec<f64>, LatticeError> {
        if !len.is_multiple_of(self.dim) {
            return Err(LatticeError::Dimension("length is not a multiple of the lattice dimension"));
        }
        let mut out = Vec::with_capacity(len);
        for _ in 0..len / self.dim {
            out.extend(self.sample_dither(rng).values);
        }
        Ok(out)
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoment {
    pub per_dim: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// A vector in the Voronoi cell of the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DitherVector {
    pub values: Vec<f64>,
}

/// `Λ₁ ⊂ Λ₂`: a coarse shaping lattice inside a fine coding lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedPair {
    pub coarse: Lattice,
    pub fine: Lattice,
}

impl NestedPair {
    /// Checks that every coarse basis vector is a fine lattice point.
    pub fn new(coarse: Lattice, fine: Lattice) -> Result<Self, LatticeError> {
        if coarse.dim != fine.dim {
            return Err(LatticeError::Dimension("coarse and fine lattices differ in dimension"));
        }
        let n = coarse.dim;
        for r in 0..n {
            if !fine.contains(&coarse.gen[r * n..(r + 1) * n], 1e-9) {
                return Err(LatticeError::NotNested);
            }
        }
        Ok(Self { coarse, fine })
    }

    /// `|Λ₂ ∩ V₀(Λ₁)| = vol(Λ₁)/vol(Λ₂)`.
    pub fn nesting_ratio(&self) -> f64 {
        self.coarse.volume() / self.fine.volume()
    }

    /// The codebook `Λ₂ ∩ V₀(Λ₁)`: fine points in the coarse parallelepiped, each
    /// reduced mod Λ₁.
    pub fn codebook(&self) -> Result<Vec<Vec<f64>>, LatticeError> {
        let n = self.coarse.dim;
        // fine coordinates of the parallelepiped corners bound the search box
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for mask in 0..(1u32 << n) {
            let u: Vec<f64> = (0..n).map(|i| f64::from((mask >> i) & 1)).collect();
            let corner = row_times(n, &u, &self.coarse.gen);
            for (i, c) in self.fine.coordinates(&corner).into_iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        let lo: Vec<i64> = lo.iter().map(|&v| floor(v - 1e-9) as i64).collect();
        let hi: Vec<i64> = hi.iter().map(|&v| ceil(v + 1e-9) as i64).collect();
        let count = lo.iter().zip(&hi).fold(1u64, |acc, (a, b)| acc.saturating_mul((b - a + 1) as u64));
        if count > MAX_ENUM_POINTS {
            return Err(LatticeError::EnumerationTooLarge { points: count });
        }
        let eps = 1e-9;
        let mut z = lo.clone();
        let mut out = Vec::new();
        loop {
            let x = self.fine.point(&z);
            let u = self.coarse.coordinates(&x);
            if u.iter().all(|&v| v >= -eps && v < 1.0 - eps) {
                out.push(self.coarse.mod_lattice(&x)?);
            }
            let Some(j) = (0..n).rev().find(|&i| z[i] < hi[i]) else {
                break;
            };
            z[j] += 1;
            z[j + 1..].copy_from_slice(&lo[j + 1..]);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_nearest(l: &Lattice, x: &[f64], window: i64) -> (Vec<f64>, f64) {
        let n = l.dim();
        let mut z = vec![-window; n];
        let mut best = (vec![], f64::INFINITY);
        loop {
            let p = l.point(&z);
            let d = dist2(x, &p);
            if d < best.1 {
                best = (p, d);
            }
            let Some(j) = (0..n).rev().find(|&i| z[i] < window) else {
                break;
            };
            z[j] += 1;
            for v in z.iter_mut().skip(j + 1) {
                *v = -window;
            }
        }
        best
    }

    #[test]
    fn construction_rejects_singular() {
        assert_eq!(Lattice::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]), Err(LatticeError::Singular));
        assert!(matches!(Lattice::from_rows(&[&[1.0, 2.0]]), Err(LatticeError::Dimension(_))));
    }

    #[test]
    fn cubic_examples() {
        let z2 = Lattice::cubic(2, 1.0).unwrap();
        assert_eq!(z2.nearest_point(&[0.6, -1.2]).unwrap(), [1.0, -1.0]);
        assert_eq!(z2.nearest_point(&[3.0, -2.0]).unwrap(), [3.0, -2.0]);
        assert_eq!(z2.nearest_point(&[0.5, 1.5]).unwrap(), [0.0, 2.0]);
        let z1 = Lattice::cubic(1, 1.0).unwrap();
        assert!((z1.mod_lattice(&[2.3]).unwrap()[0] - 0.3).abs() < 1e-12);
        assert_eq!(z1.mod_lattice(&[-4.0]).unwrap(), [0.0]);
        assert!(matches!(z2.nearest_point(&[1.0]), Err(LatticeError::Dimension(_))));
    }

    #[test]
    fn general_matches_brute_force() {
        let l = Lattice::from_rows(&[&[1.0, 0.0], &[0.5, 0.5]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let q = l.nearest_point(&x).unwrap();
            let (b, bd) = brute_nearest(&l, &x, 20);
            assert!((dist2(&x, &q) - bd).abs() < 1e-12, "x={x:?} q={q:?} brute={b:?}");
        }
    }

    #[test]
    fn skewed_4d_matches_brute_force_and_quantizes_to_lattice() {
        let l = Lattice::from_rows(&[
            &[1.0, 0.3, 0.0, 0.0],
            &[0.2, 1.1, 0.4, 0.0],
            &[0.0, -0.5, 0.9, 0.3],
            &[0.1, 0.0, 0.2, 1.2],
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..40 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let q = l.nearest_point(&x).unwrap();
            assert!(l.contains(&q, 1e-9));
            let (_, bd) = brute_nearest(&l, &x, 5);
            assert!(dist2(&x, &q) <= bd + 1e-12);
        }
    }

    #[test]
    fn mod_is_distributive() {
        let lats = [
            Lattice::cubic(2, 0.7).unwrap(),
            Lattice::from_rows(&[&[1.0, 0.0], &[0.5, 0.5]]).unwrap(),
            Lattice::from_rows(&[&[2.0, 0.0], &[1.0, 1.7320508075688772]]).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for l in &lats {
            for _ in 0..1000 {
                let x = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
                let y = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
                let mx = l.mod_lattice(&x).unwrap();
                let lhs = l.mod_lattice(&[mx[0] + y[0], mx[1] + y[1]]).unwrap();
                let rhs = l.mod_lattice(&[x[0] + y[0], x[1] + y[1]]).unwrap();
                assert!((lhs[0] - rhs[0]).abs() < 1e-12 && (lhs[1] - rhs[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mod_result_quantizes_to_zero_and_negation_closure() {
        let l = Lattice::from_rows(&[&[1.0, 0.0], &[0.5, 0.5]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let x = [rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)];
            let r = l.mod_lattice(&x).unwrap();
            assert!(l.nearest_point(&r).unwrap().iter().all(|v| v.abs() < 1e-12));
            let q = l.nearest_point(&x).unwrap();
            let neg: Vec<f64> = q.iter().map(|v| -v).collect();
            let back = l.nearest_point(&neg).unwrap();
            assert!(dist2(&back, &neg) < 1e-18);
        }
    }

    #[test]
    fn dither_is_in_voronoi_cell_and_uniform_on_z1() {
        let z1 = Lattice::cubic(1, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws: Vec<f64> = (0..100_000).map(|_| z1.sample_dither(&mut rng).values[0]).collect();
        assert!(draws.iter().all(|&d| (-0.5..=0.5).contains(&d)));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.02);
        let m2 = draws.iter().map(|d| d * d).sum::<f64>() / draws.len() as f64;
        assert!((m2 * 12.0 - 1.0).abs() < 0.02);

        let l = Lattice::from_rows(&[&[1.0, 0.0], &[0.5, 0.5]]).unwrap();
        for _ in 0..500 {
            let d = l.sample_dither(&mut rng);
            assert!(l.nearest_point(&d.values).unwrap().iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn second_moment_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let z1 = Lattice::cubic(1, 1.0).unwrap();
        let m = z1.second_moment(100_000, &mut rng).unwrap();
        assert!((m.per_dim * 12.0 - 1.0).abs() < 0.02);
        let z4 = Lattice::cubic(4, 1.0).unwrap();
        let m4 = z4.second_moment(50_000, &mut rng).unwrap();
        assert!((m4.per_dim * 12.0 - 1.0).abs() < 0.02);
        assert!(matches!(z1.second_moment(100, &mut rng), Err(LatticeError::TooFewSamples { .. })));

        let hex = Lattice::from_rows(&[&[1.0, 0.0], &[0.5, 0.866_025_403_784_438_6]]).unwrap();
        let base = hex.second_moment(50_000, &mut rng).unwrap();
        let scaled = hex.scaled(3.0).unwrap().second_moment(50_000, &mut rng).unwrap();
        let ratio = scaled.per_dim / base.per_dim;
        let tol = 3.0 * 9.0 * (base.std_err / base.per_dim + scaled.std_err / scaled.per_dim);
        assert!((ratio - 9.0).abs() < tol, "ratio {ratio}");
    }

    #[test]
    fn scaling_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let z1 = Lattice::cubic(1, 1.0).unwrap();
        let (c, _) = z1.scale_factor_for(1.0, &mut rng).unwrap();
        assert!((c - 12f64.sqrt()).abs() < 1e-12);
        let (c1, _) = z1.scale_factor_for(1.0 / 12.0, &mut rng).unwrap();
        assert!((c1 - 1.0).abs() < 1e-12);
        let (c2, _) = z1.scale_factor_for(2.0, &mut rng).unwrap();
        assert!((c2 / c - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(z1.scale_factor_for(0.0, &mut rng).unwrap_err(), LatticeError::NonPositiveTarget(0.0));

        let hex = Lattice::from_rows(&[&[1.0, 0.0], &[0.5, 0.866_025_403_784_438_6]]).unwrap();
        let scaled = hex.scale_to_second_moment(2.5, &mut rng).unwrap();
        let m = scaled.second_moment(100_000, &mut rng).unwrap();
        assert!((m.per_dim / 2.5 - 1.0).abs() < 0.03);
    }

    #[test]
    fn nested_pair_codebook() {
        let fine = Lattice::cubic(2, 1.0).unwrap();
        let coarse = Lattice::cubic(2, 4.0).unwrap();
        let pair = NestedPair::new(coarse.clone(), fine.clone()).unwrap();
        assert!((pair.nesting_ratio() - 16.0).abs() < 1e-9);
        let book = pair.codebook().unwrap();
        assert_eq!(book.len(), 16);
        for c in &book {
            assert!(fine.contains(c, 1e-9));
            assert!(coarse.nearest_point(c).unwrap().iter().all(|v| v.abs() < 1e-12));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let z = [rng.random_range(-5i64..5), rng.random_range(-5i64..5)];
            let p = coarse.point(&z);
            assert_eq!(fine.nearest_point(&p).unwrap(), p);
        }
        let odd = Lattice::cubic(2, 1.5).unwrap();
        assert_eq!(NestedPair::new(odd, fine).unwrap_err(), LatticeError::NotNested);

        let hex_fine = Lattice::from_rows(&[&[1.0, 0.0], &[0.5, 0.866_025_403_784_438_6]]).unwrap();
        let hex_coarse = hex_fine.scaled(3.0).unwrap();
        let pair = NestedPair::new(hex_coarse, hex_fine).unwrap();
        assert_eq!(pair.codebook().unwrap().len(), 9);
    }
}
