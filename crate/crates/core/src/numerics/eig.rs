use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use super::matrix::SymMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenOrder {
    /// Largest eigenvalue first.
    ValueDescending,
    /// Largest `|λ|` first; equal magnitudes put the positive value first.
    AbsDescending,
}

/// Full spectral decomposition `A = V diag(λ) Vᵀ` of a real symmetric matrix.
///
/// Each eigenvector is normalized and its largest-magnitude component is
/// positive (ties resolved at the lowest index), so stored results are
/// reproducible. Vectors inside a degenerate group carry no further
/// convention.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// Column-major: vector `k` occupies `vectors[k*n..(k+1)*n]`.
    vectors: Vec<f64>,
    n: usize,
    pub order: EigenOrder,
}

impl EigenResult {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.n.max(1)).take(self.eigenvalues.len())
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        SymMatrix::from_fn(self.n, |i, j| {
            self.eigenvalues
                .iter()
                .enumerate()
                .map(|(k, lam)| lam * self.vector(k)[i] * self.vector(k)[j])
                .sum()
        })
    }
}

fn to_faer(a: &SymMatrix) -> Result<Mat<f64>> {
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = a.dim();
    Ok(Mat::from_fn(n, n, |i, j| a.get(i, j)))
}

fn ordering(values: &[f64], order: EigenOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    match order {
        EigenOrder::ValueDescending => idx.sort_by(|&a, &b| values[b].total_cmp(&values[a])),
        EigenOrder::AbsDescending => idx.sort_by(|&a, &b| {
            values[b]
                .abs()
                .total_cmp(&values[a].abs())
                .then(values[b].total_cmp(&values[a]))
        }),
    }
    idx
}

pub fn symmetric_eig(a: &SymMatrix, order: EigenOrder) -> Result<EigenResult> {
    let n = a.dim();
    if n == 0 {
        return Ok(EigenResult {
            eigenvalues: vec![],
            vectors: vec![],
            n,
            order,
        });
    }
    let m = to_faer(a)?;
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let raw: Vec<f64> = (0..n).map(|k| s[k]).collect();
    let idx = ordering(&raw, order);
    let mut vectors = Vec::with_capacity(n * n);
    let mut eigenvalues = Vec::with_capacity(n);
    for &k in &idx {
        eigenvalues.push(raw[k]);
        let mut v: Vec<f64> = (0..n).map(|i| u[(i, k)]).collect();
        let mut pivot = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        vectors.extend_from_slice(&v);
    }
    Ok(EigenResult {
        eigenvalues,
        vectors,
        n,
        order,
    })
}

/// Eigenvalues only; markedly cheaper than [`symmetric_eig`] for large `n`.
pub fn symmetric_eigenvalues(a: &SymMatrix, order: EigenOrder) -> Result<Vec<f64>> {
    if a.dim() == 0 {
        return Ok(vec![]);
    }
    let m = to_faer(a)?;
    let raw = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigenvalue computation failed: {e:?}")))?;
    Ok(ordering(&raw, order).into_iter().map(|k| raw[k]).collect())
}
