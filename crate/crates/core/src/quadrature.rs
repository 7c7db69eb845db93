//! Adaptive Simpson integration and periodic trapezoid sums.

use std::f64::consts::PI;

use num_complex::Complex64;

const MAX_DEPTH: u32 = 50;

/// Panels evaluated before adaptivity starts; guards against integrands that vanish
/// at the first few Simpson nodes.
const INITIAL_PANELS: usize = 16;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by adaptive Simpson.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let h = (b - a) / INITIAL_PANELS as f64;
    let mut total = 0.0;
    for i in 0..INITIAL_PANELS {
        let lo = a + h * i as f64;
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + h };
        let (fa, fb) = (f(lo), f(hi));
        let fc = f(0.5 * (lo + hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fc + fb);
        total += recurse(&f, lo, hi, fa, fb, fc, whole, tol / INITIAL_PANELS as f64, MAX_DEPTH);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let (l, r) = (0.5 * (a + c), 0.5 * (c + b));
    let (fl, fr) = (f(l), f(r));
    let left = (c - a) / 6.0 * (fa + 4.0 * fl + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fr + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, c, fa, fc, fl, left, 0.5 * tol, depth - 1) + recurse(f, c, b, fc, fb, fr, right, 0.5 * tol, depth - 1)
}

/// Mean of `f` over the circle sampled at `k` equispaced nodes.
///
/// Exact for trigonometric polynomials of degree below `k`.
pub fn circle_mean<F: Fn(f64) -> Complex64>(f: F, k: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..k {
        acc += f(2.0 * PI * j as f64 / k as f64);
    }
    acc / k as f64
}
