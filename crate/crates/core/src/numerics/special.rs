use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

/// `sin(x) / x`, equal to 1 at the origin.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Sine integral `Si(z) = ∫₀ᶻ sin(u)/u du`, odd in `z`.
///
/// Power series below `|z| = 2`; above, the continued fraction for the
/// exponential integral `E₁(iz)` evaluated with the modified Lentz method.
/// Absolute accuracy is a few ulps of `π/2` over the whole real line.
pub fn sine_integral(z: f64) -> f64 {
    if z < 0.0 {
        return -sine_integral(-z);
    }
    if z == 0.0 {
        return 0.0;
    }
    if z.is_infinite() {
        return FRAC_PI_2;
    }
    if z <= 2.0 {
        sine_integral_series(z)
    } else {
        sine_integral_continued_fraction(z)
    }
}

fn sine_integral_series(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = z; // z^(2k+1) / (2k+1)!
    let mut sum = z;
    for k in 1..40 {
        let a = (2 * k) as f64;
        term *= -z2 / (a * (a + 1.0));
        let contribution = term / (a + 1.0);
        sum += contribution;
        if contribution.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn sine_integral_continued_fraction(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, z);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..10_000 {
        let a = -(((i - 1) * (i - 1)) as f64);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    let h = Complex64::new(z.cos(), -z.sin()) * h;
    FRAC_PI_2 + h.im
}

/// Physicists' Hermite polynomial `H_m(x)` by the three-term recurrence
/// `H_{k+1} = 2x H_k - 2k H_{k-1}`.
pub fn hermite(m: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..m {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Associated Laguerre polynomial `L_p^l(x)`.
pub fn laguerre_assoc(p: usize, l: usize, x: f64) -> f64 {
    let alpha = l as f64;
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}
