//! Dense complex matrices.
//!
//! Everything here is row-major and sized for factor spaces (a single Fock
//! mode, one or two spins) or for small full spaces in tests. Full-space
//! Hamiltonians are kept factored, see [`crate::hilbert::KronOperator`].

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Tolerance used when a caller asserts that an operator is unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Square dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    dim: usize,
    entries: Vec<C64>,
}

impl LinearOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c));
            }
        }
        Self { dim, entries }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Builds from row-major data; `data.len()` must be a perfect square.
    pub fn from_rows(data: Vec<C64>) -> Result<Self> {
        let dim = isqrt(data.len());
        if dim * dim != data.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} entries is not a square matrix",
                data.len()
            )));
        }
        Ok(Self { dim, entries: data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|e| e * s).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.entries[k * n..(k + 1) * n];
                let dst = &mut out.entries[r * n..(r + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "apply dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|r| {
                self.entries[r * n..(r + 1) * n]
                    .iter()
                    .zip(v)
                    .fold(ZERO, |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`; `self` indices vary slowest.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (a, b) = (self.dim, rhs.dim);
        Self::from_fn(a * b, |r, c| self[(r / b, c / b)] * rhs[(r % b, c % b)])
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn one_norm(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|c| (0..n).map(|r| self.entries[r * n + c].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Induced infinity-norm (maximum absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|r| self.entries[r * n..(r + 1) * n].iter().map(|e| e.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// ‖U†U − I‖_max.
    pub fn unitarity_defect(&self) -> f64 {
        self.dagger().matmul(self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= UNITARITY_TOL
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).fold(ZERO, |a, b| a + b)
    }

    /// Matrix exponential by scaling and squaring with a [13/13] Padé
    /// approximant.
    pub fn expm(&self) -> Self {
        let n = self.dim;
        if n == 0 {
            return self.clone();
        }
        const THETA_13: f64 = 5.371920351148152;
        let norm = self.one_norm();
        let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
        let scaled = self.scale(C64::new(2f64.powi(-s), 0.0));
        let mut result = pade13(&scaled);
        for _ in 0..s {
            result = result.matmul(&result);
        }
        result
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut b = rhs.entries.clone();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
                .unwrap_or(col);
            if a[pivot * n + col].norm() == 0.0 {
                return Err(Error::NoConvergence("singular matrix in solve".into()));
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                    b.swap(col * n + k, pivot * n + k);
                }
            }
            let inv = ONE / a[col * n + col];
            for row in (col + 1)..n {
                let factor = a[row * n + col] * inv;
                if factor == ZERO {
                    continue;
                }
                for k in col..n {
                    let v = a[col * n + k];
                    a[row * n + k] -= factor * v;
                }
                for k in 0..n {
                    let v = b[col * n + k];
                    b[row * n + k] -= factor * v;
                }
            }
        }
        for col in (0..n).rev() {
            let inv = ONE / a[col * n + col];
            for k in 0..n {
                b[col * n + k] *= inv;
            }
            for row in 0..col {
                let factor = a[row * n + col];
                if factor == ZERO {
                    continue;
                }
                for k in 0..n {
                    let v = b[col * n + k];
                    b[row * n + k] -= factor * v;
                }
            }
        }
        Ok(Self { dim: n, entries: b })
    }
}

const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn pade13(a: &LinearOperator) -> LinearOperator {
    let n = a.dim;
    let c = |x: f64| C64::new(x, 0.0);
    let id = LinearOperator::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);
    let b = PADE_13;
    let u_inner = &(&(&a6.scale(c(b[13])) + &a4.scale(c(b[11]))) + &a2.scale(c(b[9])));
    let u_inner = &(&(&(&(&a6.matmul(u_inner) + &a6.scale(c(b[7]))) + &a4.scale(c(b[5])))
        + &a2.scale(c(b[3])))
        + &id.scale(c(b[1])));
    let u = a.matmul(u_inner);
    let v_inner = &(&(&a6.scale(c(b[12])) + &a4.scale(c(b[10]))) + &a2.scale(c(b[8])));
    let v = &(&(&(&a6.matmul(v_inner) + &a6.scale(c(b[6]))) + &a4.scale(c(b[4])))
        + &a2.scale(c(b[2])))
        + &id.scale(c(b[0]));
    let p = &v + &u;
    let q = &v - &u;
    q.solve(&p).expect("Padé denominator is nonsingular for scaled input")
}

fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl Index<(usize, usize)> for LinearOperator {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.entries[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for LinearOperator {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.entries[r * self.dim + c]
    }
}

impl Add for &LinearOperator {
    type Output = LinearOperator;
    fn add(self, rhs: Self) -> LinearOperator {
        assert_eq!(self.dim, rhs.dim);
        LinearOperator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &LinearOperator {
    type Output = LinearOperator;
    fn sub(self, rhs: Self) -> LinearOperator {
        assert_eq!(self.dim, rhs.dim);
        LinearOperator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &LinearOperator {
    type Output = LinearOperator;
    fn mul(self, rhs: Self) -> LinearOperator {
        self.matmul(rhs)
    }
}

/// Euclidean inner product ⟨a|b⟩.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}
