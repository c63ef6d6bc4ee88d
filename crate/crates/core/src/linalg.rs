//! Minimal dense linear algebra: a row-major square matrix, LU solves with
//! partial pivoting, and a power-iteration spectral radius for nonnegative
//! matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Solves `self * x = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rhs.len(),
            });
        }
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                .unwrap_or(col);
            if a[pivot * n + col].abs() <= 1e-14 * scale {
                return Err(Error::SingularMatrix);
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                b.swap(pivot, col);
            }
            let diag = a[col * n + col];
            for row in col + 1..n {
                let factor = a[row * n + col] / diag;
                if factor == 0.0 {
                    continue;
                }
                for k in col..n {
                    a[row * n + k] -= factor * a[col * n + k];
                }
                b[row] -= factor * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let s: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
            x[row] = (b[row] - s) / a[row * n + row];
        }
        Ok(x)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

pub const POWER_ITERATION_TOLERANCE: f64 = 1e-12;
pub const POWER_ITERATION_MAX_ITERS: usize = 100_000;

/// Spectral radius of a nonnegative square matrix.
///
/// Power iteration runs on `A + I`: for nonnegative `A` the Perron root is
/// real and dominant, and the unit shift makes it strictly dominant even
/// when `A` is periodic (e.g. a permutation matrix). Convergence is declared
/// when the Rayleigh quotient moves by less than `1e-12` (relative).
pub fn spectral_radius(matrix: &Matrix) -> Result<f64> {
    let n = matrix.dim();
    if n == 0 {
        return Ok(0.0);
    }
    if let Some(&v) = matrix.as_slice().iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "matrix entry".into(),
            value: v,
            reason: "spectral radius by power iteration requires a nonnegative matrix",
        });
    }
    if matrix.as_slice().iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut previous = f64::NAN;
    let mut stable_steps = 0;
    for _ in 0..POWER_ITERATION_MAX_ITERS {
        let mut y = matrix.mul_vec(&x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += xi;
        }
        // x has unit norm, so x'(A+I)x is the Rayleigh quotient
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if (rayleigh - previous).abs() <= POWER_ITERATION_TOLERANCE * rayleigh.max(1.0) {
            stable_steps += 1;
            if stable_steps >= 3 {
                return Ok((rayleigh - 1.0).max(0.0));
            }
        } else {
            stable_steps = 0;
        }
        previous = rayleigh;
    }
    Err(Error::NoConvergence(POWER_ITERATION_MAX_ITERS))
}
