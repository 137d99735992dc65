//! One-dimensional root finding and maximization.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Halves the bracket until it cannot be split further in floating point
/// and returns the endpoint with the smaller residual.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::NoRoot(format!(
            "bracket [{lo}, {hi}] does not straddle a root (f = {f_lo:.3e}, {f_hi:.3e})"
        )));
    }
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (f(lo).abs(), f(hi).abs());
    Ok(if a <= b { lo } else { hi })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// followed by a comparison with both endpoints.
///
/// Returns `(argmax, max)`.
pub fn golden_section_max<F>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut best = (mid, f(mid));
    for x in [a, b] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Dense grid maximization; used by tests and cross-checks.
pub fn grid_max<F>(f: F, a: f64, b: f64, points: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut best = (a, f(a));
    for i in 1..points {
        let x = a + (b - a) * i as f64 / (points - 1) as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}
