use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample points of a one-dimensional continuous index with quadrature weights.
///
/// Points are strictly increasing and every weight is positive. The label is
/// free text describing the units of the coordinate, e.g. `"omega*tau1"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    points: Vec<f64>,
    weights: Vec<f64>,
    label: String,
}

impl Axis {
    pub fn new(points: Vec<f64>, weights: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::invalid(format!(
                "axis has {} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::invalid("axis must contain at least one point"));
        }
        if points.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::invalid("axis points and weights must be finite"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("axis points must be strictly increasing"));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::invalid("axis weights must be positive"));
        }
        Ok(Self {
            points,
            weights,
            label: label.into(),
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest absolute coordinate covered by the axis.
    pub fn half_span(&self) -> f64 {
        let first = self.points[0].abs();
        let last = self.points[self.points.len() - 1].abs();
        first.min(last)
    }

    /// Weighted inner product of two functions sampled on this axis.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.len());
        debug_assert_eq!(b.len(), self.len());
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }

    /// The same axis with every coordinate (and weight) multiplied by `factor`.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid("dilation factor must be positive and finite"));
        }
        Axis::new(
            self.points.iter().map(|p| p * factor).collect(),
            self.weights.iter().map(|w| w * factor).collect(),
            self.label.clone(),
        )
    }
}

/// Uniform axis of `n` points on `[-x_max, x_max]`.
///
/// All weights equal the spacing `2 x_max / (n - 1)`; endpoints are not halved
/// because every integrand used here has decayed to round-off at the boundary.
pub fn make_uniform_axis(x_max: f64, n: usize) -> Result<Axis> {
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(Error::invalid(format!("x_max must be positive, got {x_max}")));
    }
    if n < 2 {
        return Err(Error::invalid(format!("uniform axis needs n >= 2, got {n}")));
    }
    let step = 2.0 * x_max / (n - 1) as f64;
    let points = (0..n)
        .map(|i| {
            // Mirror the lower half so the grid is exactly symmetric about 0.
            let j = n - 1 - i;
            if i <= j {
                -x_max + step * i as f64
            } else {
                x_max - step * j as f64
            }
        })
        .collect();
    Axis::new(points, vec![step; n], "x")
}
