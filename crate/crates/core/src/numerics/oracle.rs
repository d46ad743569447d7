//! Reference integrators used only by tests, independent of the production
//! quadrature paths.

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance `tol`.
pub(crate) fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // Split into panels first so oscillatory integrands are resolved.
    let panels = (((b - a).abs() * 4.0).ceil() as usize).max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + h * k as f64;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            recurse(&f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 50)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// `∫₀^∞ f` by adaptive Simpson on `[0, cutoff]`; the caller picks a cutoff
/// beyond which `f` is negligible.
pub(crate) fn integrate_to_cutoff(f: impl Fn(f64) -> f64, cutoff: f64, tol: f64) -> f64 {
    adaptive_simpson(f, 0.0, cutoff, tol)
}
