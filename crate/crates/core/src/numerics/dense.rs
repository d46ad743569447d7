//! Small general (non-symmetric) dense linear algebra.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};

fn to_mat(rows: &[Vec<f64>]) -> Result<Mat<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::invalid("ragged matrix rows"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    Ok(Mat::from_fn(n, m, |i, j| rows[i][j]))
}

fn square(rows: &[Vec<f64>]) -> Result<Mat<f64>> {
    let a = to_mat(rows)?;
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::invalid(format!("expected a non-empty square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    Ok(a)
}

/// 2-norm condition number `σ_max / σ_min`; infinite when singular.
pub fn condition_number(rows: &[Vec<f64>]) -> Result<f64> {
    let a = to_mat(rows)?;
    let sv = a
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

/// Solve `A x = b` by LU with partial pivoting.
pub fn solve_linear(rows: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let a = square(rows)?;
    if rhs.len() != a.nrows() {
        return Err(Error::invalid("right-hand side length does not match the matrix"));
    }
    let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = a.partial_piv_lu().solve(&b);
    let out: Vec<f64> = (0..rhs.len()).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("linear solve produced non-finite values".into()));
    }
    Ok(out)
}

pub fn determinant(rows: &[Vec<f64>]) -> Result<f64> {
    Ok(square(rows)?.determinant())
}
