//! Gauss–Kronrod and Gauss–Legendre rules.

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
// 7-point Gauss weights at the odd positions.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

// 7-point Kronrod extension of the 3-point Gauss rule.
const XGK7: [f64; 4] = [
    0.960_491_268_708_020_3,
    0.774_596_669_241_483_4,
    0.434_243_749_346_802_6,
    0.0,
];
const WGK7: [f64; 4] = [
    0.104_656_226_026_467_3,
    0.268_488_089_868_333_4,
    0.401_397_414_775_962_2,
    0.450_916_538_658_474_1,
];
const WG3: [f64; 2] = [0.555_555_555_555_555_6, 0.888_888_888_888_888_9];

/// Embedded Gauss–Kronrod pair used for each box of [`adaptive_2d_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// 3-point Gauss inside 7-point Kronrod; 49 evaluations per box.
    Gk7,
    /// 7-point Gauss inside 15-point Kronrod; 225 evaluations per box.
    Gk15,
}

/// Nodes on `[a, b]` as `(x, kronrod weight, gauss weight)`; the Gauss weight
/// is zero at Kronrod-only nodes.
fn nodes(rule: Rule, a: f64, b: f64) -> Vec<(f64, f64, f64)> {
    let (xk, wk, wg): (&[f64], &[f64], &[f64]) = match rule {
        Rule::Gk7 => (&XGK7, &WGK7, &WG3),
        Rule::Gk15 => (&XGK, &WGK, &WG),
    };
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let last = xk.len() - 1;
    let mut out = Vec::with_capacity(2 * last + 1);
    for i in 0..last {
        let g = if i % 2 == 1 { wg[i / 2] * h } else { 0.0 };
        out.push((c - h * xk[i], wk[i] * h, g));
        out.push((c + h * xk[i], wk[i] * h, g));
    }
    out.push((c, wk[last] * h, wg[wg.len() - 1] * h));
    out
}

/// Tensor estimate over a box: `(kronrod, |kronrod - gauss|)`.
fn tensor_box<F: Fn(f64, f64) -> f64>(rule: Rule, f: &F, x0: f64, x1: f64, y0: f64, y1: f64) -> (f64, f64) {
    let nx = nodes(rule, x0, x1);
    let ny = nodes(rule, y0, y1);
    let mut k = 0.0;
    let mut g = 0.0;
    for &(x, wkx, wgx) in &nx {
        for &(y, wky, wgy) in &ny {
            let v = f(x, y);
            k += wkx * wky * v;
            g += wgx * wgy * v;
        }
    }
    (k, (k - g).abs())
}

/// Adaptive integral of `f(x, y)` over `[x0, x1] x [y0, y1]` with the G7/K15 rule.
pub fn adaptive_2d<F>(
    f: F,
    x: (f64, f64),
    y: (f64, f64),
    rel_tol: f64,
    abs_tol: f64,
    max_boxes: usize,
) -> (f64, f64)
where
    F: Fn(f64, f64) -> f64,
{
    adaptive_2d_with(Rule::Gk15, f, x, y, rel_tol, abs_tol, max_boxes)
}

/// Adaptive integral with a chosen rule.
///
/// Boxes are bisected along their longer side (in units of the original
/// extents) until the summed error estimate is below
/// `max(abs_tol, rel_tol * |I|)` or `max_boxes` is reached.
/// Returns `(value, error estimate)`.
pub fn adaptive_2d_with<F>(
    rule: Rule,
    f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    rel_tol: f64,
    abs_tol: f64,
    max_boxes: usize,
) -> (f64, f64)
where
    F: Fn(f64, f64) -> f64,
{
    let sx = (x1 - x0).abs().max(f64::MIN_POSITIVE);
    let sy = (y1 - y0).abs().max(f64::MIN_POSITIVE);
    let (v, e) = tensor_box(rule, &f, x0, x1, y0, y1);
    let mut boxes = vec![(x0, x1, y0, y1, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) && boxes.len() < max_boxes {
        let (idx, _) = boxes
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, b)| if b.5 > acc.1 { (i, b.5) } else { acc });
        let (a0, a1, b0, b1, bv, be) = boxes.swap_remove(idx);
        total -= bv;
        err -= be;
        let halves = if (a1 - a0) / sx >= (b1 - b0) / sy {
            let m = 0.5 * (a0 + a1);
            [(a0, m, b0, b1), (m, a1, b0, b1)]
        } else {
            let m = 0.5 * (b0 + b1);
            [(a0, a1, b0, m), (a0, a1, m, b1)]
        };
        for (c0, c1, d0, d1) in halves {
            let (v, e) = tensor_box(rule, &f, c0, c1, d0, d1);
            total += v;
            err += e;
            boxes.push((c0, c1, d0, d1, v, e));
        }
    }
    // Recompute from the surviving boxes to shed accumulated cancellation.
    let total: f64 = boxes.iter().map(|b| b.4).sum();
    let err: f64 = boxes.iter().map(|b| b.5).sum();
    (total, err)
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((c + h * x, w * h));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(10, 0.0, 2.0);
        let s: f64 = rule.iter().map(|(x, w)| w * x.powi(19)).sum();
        assert!((s - 2f64.powi(20) / 20.0).abs() < 1e-8);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_gaussian_disc_mass() {
        // Mass of the unit Gaussian prior inside radius 2 in polar form.
        let pdf = |r: f64, _t: f64| r * (-r * r).exp() / std::f64::consts::PI;
        let (v, e) = adaptive_2d(pdf, (0.0, 2.0), (0.0, 2.0 * std::f64::consts::PI), 1e-12, 0.0, 1000);
        assert!((v - (1.0 - (-4.0f64).exp())).abs() < 1e-12, "{v} {e}");
    }

    #[test]
    fn gk7_matches_gk15() {
        let f = |x: f64, y: f64| (x * y).sin() + x * x * (-y).exp();
        let (a, _) = adaptive_2d_with(Rule::Gk7, f, (0.0, 1.5), (0.0, 2.0), 1e-12, 0.0, 10_000);
        let (b, _) = adaptive_2d(f, (0.0, 1.5), (0.0, 2.0), 1e-13, 0.0, 10_000);
        assert!((a - b).abs() < 1e-11, "{a} {b}");
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |x: f64, y: f64| (-(x * x + y * y) * 400.0).exp();
        let (v, _) = adaptive_2d(f, (-1.0, 1.0), (-1.0, 1.0), 1e-10, 0.0, 10_000);
        assert!((v - std::f64::consts::PI / 400.0).abs() < 1e-11);
    }
}
