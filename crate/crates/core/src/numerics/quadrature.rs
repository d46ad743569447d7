//! Gauss-Laguerre quadrature for integrals of the form `∫₀^∞ P(u) e^{-a u} du`.

use super::eig::{symmetric_eig, EigenOrder};
use super::matrix::SymMatrix;
use super::special::laguerre_assoc;
use crate::error::Result;

/// Nodes and weights of the `n`-point Gauss-Laguerre rule (weight `e^{-t}`).
///
/// Exact for polynomials of degree `2n - 1`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLaguerre {
    /// Golub-Welsch on the Jacobi matrix, then a Newton polish of every node
    /// and weights from `w_i = t_i / ((n+1) L_{n+1}(t_i))²`.
    pub fn new(n: usize) -> Result<Self> {
        let n = n.max(1);
        let jacobi = SymMatrix::from_fn(n, |i, j| {
            if i == j {
                (2 * i + 1) as f64
            } else if j == i + 1 {
                (i + 1) as f64
            } else {
                0.0
            }
        });
        let eig = symmetric_eig(&jacobi, EigenOrder::ValueDescending)?;
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().rev().copied().collect();
        for t in nodes.iter_mut() {
            for _ in 0..3 {
                let (l, dl) = laguerre_with_derivative(n, *t);
                if dl == 0.0 {
                    break;
                }
                *t -= l / dl;
            }
        }
        let weights = nodes
            .iter()
            .map(|&t| {
                let l = laguerre_assoc(n + 1, 0, t);
                t / (((n + 1) as f64) * l).powi(2)
            })
            .collect();
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫₀^∞ g(u) e^{-rate u} du` with `g` polynomial-like.
    pub fn integrate(&self, rate: f64, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * g(t / rate))
            .sum::<f64>()
            / rate
    }
}

// L_n(t) and its derivative n (L_n - L_{n-1}) / t.
fn laguerre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let ln = laguerre_assoc(n, 0, t);
    let lm = laguerre_assoc(n - 1, 0, t);
    (ln, n as f64 * (ln - lm) / t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_monomials_exactly() {
        let rule = GaussLaguerre::new(12).unwrap();
        let mut factorial = 1.0;
        for k in 0..24 {
            if k > 0 {
                factorial *= k as f64;
            }
            let got = rule.integrate(1.0, |u| u.powi(k));
            assert!((got - factorial).abs() <= 1e-12 * factorial, "k={k}: {got} vs {factorial}");
        }
    }

    #[test]
    fn scaled_rate() {
        let rule = GaussLaguerre::new(6).unwrap();
        // ∫ u² e^{-3u} du = 2/27
        assert!((rule.integrate(3.0, |u| u * u) - 2.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_one() {
        for n in [1, 2, 5, 20, 40] {
            let rule = GaussLaguerre::new(n).unwrap();
            let s: f64 = rule.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "n={n}: {s}");
        }
    }
}
