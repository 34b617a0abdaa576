//! Dense complex vectors and Hermitian matrices, sized for M ≈ 50.
//!
//! A hand-rolled Cholesky keeps the solver deterministic and `no_std`;
//! independent oracles in the test suite cross-check it against nalgebra.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::C64;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// self += w * other, elementwise.
    pub fn add_scaled(&mut self, other: &CMatrix, w: f64) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += w * b;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            let mut acc = C64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            *yi = acc;
        }
        y
    }

    /// Max-norm Hermitian defect, ‖A − Aᴴ‖_max.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                let d = self.get(i, j) - self.get(j, i).conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Solves (A + shift·I) x = b for Hermitian positive semidefinite A
    /// via an LLᴴ factorization. Fails on a nonpositive pivot, which for
    /// shift > 0 indicates A is indefinite beyond roundoff.
    pub fn cholesky_solve_shifted(&self, b: &[C64], shift: f64) -> Result<Vec<C64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        // Lower factor, packed row-major.
        let mut l = vec![C64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut diag = self.get(j, j).re + shift;
            for p in 0..j {
                diag -= l[j * n + p].norm_sqr();
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::FactorizationFailure { pivot: j });
            }
            let dj = libm::sqrt(diag);
            l[j * n + j] = C64::new(dj, 0.0);
            for i in (j + 1)..n {
                let mut v = self.get(i, j);
                for p in 0..j {
                    v -= l[i * n + p] * l[j * n + p].conj();
                }
                l[i * n + j] = v / dj;
            }
        }
        // Forward substitution L y = b.
        let mut y = b.to_vec();
        for i in 0..n {
            for p in 0..i {
                let lp = l[i * n + p];
                y[i] = y[i] - lp * y[p];
            }
            y[i] /= l[i * n + i].re;
        }
        // Back substitution Lᴴ x = y.
        for i in (0..n).rev() {
            for p in (i + 1)..n {
                let lp = l[p * n + i].conj();
                y[i] = y[i] - lp * y[p];
            }
            y[i] /= l[i * n + i].re;
        }
        Ok(y)
    }
}

pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc
}

pub fn norm2(a: &[C64]) -> f64 {
    libm::sqrt(a.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// xᴴ A x for Hermitian A; the imaginary part is roundoff and discarded.
pub fn quadratic_form(a: &CMatrix, x: &[C64]) -> f64 {
    dot_conj(x, &a.matvec(x)).re
}
