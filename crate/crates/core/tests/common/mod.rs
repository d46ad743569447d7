//! Reference implementations for integration tests. Written from the
//! defining formulas, sharing no code with the library's numerics.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson on `[a, b]` with `panels` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite(m: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if m == 0 {
        return h0;
    }
    for k in 1..m {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Generalized Laguerre `L_p^l(x)` by its explicit sum.
pub fn laguerre(p: usize, l: usize, x: f64) -> f64 {
    (0..=p)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(p + l, p - i) * x.powi(i as i32) / factorial(i)
        })
        .sum()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Normalized Laguerre-Gauss radial profile with spot size 1.
pub fn lg_radial(p: usize, l: usize, r: f64) -> f64 {
    let norm = (2.0 * factorial(p) / (PI * factorial(p + l))).sqrt();
    norm * (2f64.sqrt() * r).powi(l as i32) * laguerre(p, l, 2.0 * r * r) * (-r * r).exp()
}

/// `χ_l` of family `f` for a pump `Σ a_k √(2/π)/ρ_k · exp(−r²/ρ_k²)`.
pub fn chi(f: usize, l: usize, beams: &[(f64, f64)]) -> f64 {
    let p = (f - l) / 2;
    // the squared signal mode decays like e^{-2r²}; beyond r = 12 nothing is left
    let cutoff = 12.0 + 2.0 * (p + l) as f64;
    let pump = |r: f64| -> f64 {
        beams
            .iter()
            .map(|&(a, rho)| a * (2.0 / PI).sqrt() / rho * (-(r * r) / (rho * rho)).exp())
            .sum()
    };
    2.0 * PI * simpson(|r| r * pump(r) * lg_radial(p, l, r).powi(2), 0.0, cutoff, 40_000)
}

/// `Var(Σ_j u_j X_j + Σ_j w_j P_j)` for outputs `out_j = Σ_k R_kj in_k`
/// when input 0 is X-squeezed and the rest P-squeezed by `r`.
pub fn ghz_variance(rot: &[Vec<f64>], r: f64, ux: &[f64], up: &[f64]) -> f64 {
    let n = rot.len();
    let (lo, hi) = ((-2.0 * r).exp(), (2.0 * r).exp());
    (0..n)
        .map(|k| {
            let cx: f64 = (0..n).map(|j| rot[k][j] * ux[j]).sum();
            let cp: f64 = (0..n).map(|j| rot[k][j] * up[j]).sum();
            let (vx, vp) = if k == 0 { (lo, hi) } else { (hi, lo) };
            cx * cx * vx + cp * cp * vp
        })
        .sum()
}

/// Quadrature inner product `Σ w_i a_i b_i`.
pub fn dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
}

/// Squared norm of the projection of `v` onto the orthonormal set `basis`,
/// relative to `|v|²`.
pub fn projected_fraction(w: &[f64], v: &[f64], basis: &[&[f64]]) -> f64 {
    let vv = dot(w, v, v);
    basis.iter().map(|b| dot(w, v, b).powi(2)).sum::<f64>() / vv
}
