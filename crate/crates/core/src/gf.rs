//! Arithmetic and linear algebra over prime fields `F_q`.
//!
//! Elements are plain `u32` residues in `[0, q)`. Every operation reduces
//! eagerly, so a [`FieldMatrix`] never holds a non-canonical entry.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GfError {
    #[error("field size {0} is not prime")]
    NotPrime(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("entry {value} is not a residue modulo {q}")]
    EntryOutOfRange { value: u32, q: u32 },
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("operands live in different fields")]
    FieldMismatch,
}

/// Deterministic trial-division primality test; fine for the field sizes used here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// The prime field `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u32,
}

impl PrimeField {
    pub fn new(q: u32) -> Result<Self, GfError> {
        if !is_prime(q as u64) {
            return Err(GfError::NotPrime(q as u64));
        }
        Ok(Self { q })
    }

    /// Smallest prime strictly larger than `n`.
    pub fn smallest_above(n: u32) -> Self {
        let mut q = n + 1;
        while !is_prime(q as u64) {
            q += 1;
        }
        Self { q }
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u32 {
        (x % self.q as u64) as u32
    }

    /// Canonical residue of a signed integer.
    #[inline]
    pub fn reduce_signed(&self, x: i64) -> u32 {
        x.rem_euclid(self.q as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        self.reduce(s)
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + self.q as u64 - b as u64;
        self.reduce(s)
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.reduce(a as u64 * b as u64)
    }

    pub fn pow(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inverse(&self, a: u32) -> Result<u32, GfError> {
        let a = a % self.q;
        if a == 0 {
            return Err(GfError::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.q as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        Ok(self.reduce_signed(t0))
    }

    #[inline]
    pub fn div(&self, a: u32, b: u32) -> Result<u32, GfError> {
        Ok(self.mul(a, self.inverse(b)?))
    }

    pub fn check(&self, a: u32) -> Result<u32, GfError> {
        if a < self.q {
            Ok(a)
        } else {
            Err(GfError::EntryOutOfRange { value: a, q: self.q })
        }
    }

    /// Elementwise `a + b` over equal-length vectors.
    pub fn add_vec(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    pub fn sub_vec(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect()
    }

    pub fn scale_vec(&self, c: u32, a: &[u32]) -> Vec<u32> {
        a.iter().map(|&x| self.mul(c, x)).collect()
    }

    /// Uniform element drawn from `rng`.
    pub fn random_element<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.random_range(0..self.q)
    }
}

/// `field_inverse` as a free function.
pub fn field_inverse(f: PrimeField, a: u32) -> Result<u32, GfError> {
    f.inverse(a)
}

/// Dense row-major matrix over a prime field.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FieldMatrix(q={}, {}x{})", self.field.q, self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl FieldMatrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self, GfError> {
        if entries.len() != rows * cols {
            return Err(GfError::Dimension("entry count does not match rows * cols"));
        }
        for &e in &entries {
            field.check(e)?;
        }
        Ok(Self { field, rows, cols, entries })
    }

    pub fn from_rows(field: PrimeField, rows: &[&[u32]]) -> Result<Self, GfError> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(GfError::Dimension("ragged rows"));
        }
        let entries = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(field, rows.len(), cols, entries)
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self { field, rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1 % field.q;
        }
        m
    }

    /// Entries drawn i.i.d. uniformly on `F_q`, row by row.
    pub fn random<R: rand::Rng + ?Sized>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Self {
        let entries = (0..rows * cols).map(|_| field.random_element(rng)).collect();
        Self { field, rows, cols, entries }
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: u32) -> Result<(), GfError> {
        self.field.check(value)?;
        self.entries[r * self.cols + c] = value;
        Ok(())
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.entries[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn scale_row(&mut self, r: usize, k: u32) {
        let f = self.field;
        for c in 0..self.cols {
            let i = r * self.cols + c;
            self.entries[i] = f.mul(self.entries[i], k);
        }
    }

    /// The listed columns, in the given order.
    pub fn columns(&self, picks: &[usize]) -> Self {
        let mut m = Self::zeros(self.field, self.rows, picks.len());
        for r in 0..self.rows {
            for (j, &c) in picks.iter().enumerate() {
                m.entries[r * picks.len() + j] = self.get(r, c);
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GfError> {
        if self.field != other.field {
            return Err(GfError::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(GfError::Dimension("inner dimensions differ"));
        }
        let q = self.field.q as u64;
        let mut out = Self::zeros(self.field, self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = 0u64;
                for i in 0..self.cols {
                    acc = (acc + self.get(r, i) as u64 * other.get(i, c) as u64) % q;
                }
                out.entries[r * other.cols + c] = acc as u32;
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `x · M`.
    pub fn left_mul_vec(&self, x: &[u32]) -> Result<Vec<u32>, GfError> {
        if x.len() != self.rows {
            return Err(GfError::Dimension("vector length differs from row count"));
        }
        let q = self.field.q as u64;
        let mut out = vec![0u64; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0 {
                continue;
            }
            for (c, acc) in out.iter_mut().enumerate() {
                *acc = (*acc + xr as u64 * self.get(r, c) as u64) % q;
            }
        }
        Ok(out.into_iter().map(|v| v as u32).collect())
    }

    /// Matrix times column vector: `M · x`.
    pub fn mul_vec(&self, x: &[u32]) -> Result<Vec<u32>, GfError> {
        if x.len() != self.cols {
            return Err(GfError::Dimension("vector length differs from column count"));
        }
        let q = self.field.q as u64;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(0u64, |acc, (&a, &b)| (acc + a as u64 * b as u64) % q) as u32
            })
            .collect())
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    ///
    /// The pivot for each column is the first row at or below the current one with a
    /// nonzero entry.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut lead = 0usize;
        for c in 0..self.cols {
            if lead == self.rows {
                break;
            }
            let Some(p) = (lead..self.rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            self.swap_rows(lead, p);
            let inv = f.inverse(self.get(lead, c)).expect("pivot is nonzero");
            self.scale_row(lead, inv);
            for r in 0..self.rows {
                if r == lead {
                    continue;
                }
                let factor = self.get(r, c);
                if factor == 0 {
                    continue;
                }
                for cc in 0..self.cols {
                    let v = f.sub(self.get(r, cc), f.mul(factor, self.get(lead, cc)));
                    self.entries[r * self.cols + cc] = v;
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_in_place().len()
    }

    /// Solves `A x = b` for square, full-rank `A`.
    pub fn solve(&self, b: &[u32]) -> Result<Vec<u32>, GfError> {
        if self.rows != self.cols {
            return Err(GfError::Dimension("matrix is not square"));
        }
        if b.len() != self.rows {
            return Err(GfError::Dimension("right-hand side length differs from row count"));
        }
        for &v in b {
            self.field.check(v)?;
        }
        let n = self.rows;
        let mut aug = Self::zeros(self.field, n, n + 1);
        for r in 0..n {
            aug.entries[r * (n + 1)..r * (n + 1) + n].copy_from_slice(self.row(r));
            aug.entries[r * (n + 1) + n] = b[r];
        }
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(GfError::SingularMatrix);
        }
        Ok((0..n).map(|r| aug.get(r, n)).collect())
    }

    pub fn inverse(&self) -> Result<Self, GfError> {
        if self.rows != self.cols {
            return Err(GfError::Dimension("matrix is not square"));
        }
        let n = self.rows;
        let mut aug = Self::zeros(self.field, n, 2 * n);
        for r in 0..n {
            aug.entries[r * 2 * n..r * 2 * n + n].copy_from_slice(self.row(r));
            aug.entries[r * 2 * n + n + r] = 1 % self.field.q;
        }
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(GfError::SingularMatrix);
        }
        let mut out = Self::zeros(self.field, n, n);
        for r in 0..n {
            for c in 0..n {
                out.entries[r * n + c] = aug.get(r, n + c);
            }
        }
        Ok(out)
    }
}

/// `mat_rank` as a free function.
pub fn mat_rank(m: &FieldMatrix) -> usize {
    m.rank()
}

/// `mat_solve` as a free function.
pub fn mat_solve(a: &FieldMatrix, b: &[u32]) -> Result<Vec<u32>, GfError> {
    a.solve(b)
}
