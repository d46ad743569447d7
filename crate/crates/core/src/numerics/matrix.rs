use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real symmetric matrix.
///
/// Entries are stored row-major in full, but every constructor writes each
/// unordered pair once and mirrors it, so `get(i, j) == get(j, i)` bitwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated for `i <= j` only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    /// Accepts a full row-major matrix, rejecting it unless
    /// `|a_ij - a_ji| <= tol * max|a|`. The stored matrix is the symmetrized
    /// average.
    pub fn from_row_major(n: usize, data: &[f64], tol: f64) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > tol * scale {
                    return Err(Error::invalid(format!(
                        "matrix is not symmetric: entry ({i},{j}) = {a} but ({j},{i}) = {b}"
                    )));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| {
            if i == j {
                data[i * n + i]
            } else {
                0.5 * (data[i * n + j] + data[j * n + i])
            }
        }))
    }

    pub fn from_rows(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix rows must all have length n"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(n, &flat, tol)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Entrywise map preserving symmetry.
    pub fn map(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        Self::from_fn(self.n, |i, j| f(i, j, self.get(i, j)))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::invalid("matrix dimensions differ"));
        }
        Ok(Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Quadratic form `u^T A u`.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        self.apply(u).iter().zip(u).map(|(a, b)| a * b).sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}
