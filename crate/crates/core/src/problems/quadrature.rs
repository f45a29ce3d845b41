//! Gauss-Legendre rules, geometrically graded panels for corner
//! singularities and a degree-5 triangle rule.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Gauss rule with `n` points mapped to `[a, b]`, as `(x, w)` pairs.
pub fn gauss_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = (b - a) / 2.0;
    x.iter().zip(&w).map(|(x, w)| (a + half * (x + 1.0), w * half)).collect()
}

/// Panels of the graded rules: count and geometric ratio.
pub const GRADED_PANELS: usize = 12;
pub const GRADING_RATIO: f64 = 0.5;
pub const POINTS_PER_PANEL: usize = 8;

/// Composite Gauss rule on `[a, b]` with panels shrinking geometrically
/// towards the end point `toward` (which must be `a` or `b`).
pub fn graded_on(a: f64, b: f64, toward: f64) -> Vec<(f64, f64)> {
    let len = b - a;
    let mut out = Vec::with_capacity(GRADED_PANELS * POINTS_PER_PANEL);
    let mut outer = 1.0;
    for p in 0..GRADED_PANELS {
        let inner = if p + 1 == GRADED_PANELS { 0.0 } else { outer * GRADING_RATIO };
        // distances from the singular end point, as fractions of the length
        let (d0, d1) = (inner * len, outer * len);
        let (lo, hi) = if toward == a { (a + d0, a + d1) } else { (b - d1, b - d0) };
        out.extend(gauss_on(lo, hi, POINTS_PER_PANEL));
        outer = inner;
    }
    out
}

/// Tensor rule on the axis-parallel rectangle `[x0, x1] x [y0, y1]`, graded
/// towards the vertex `(gx, gy)` when given.
pub fn rectangle_rule(x0: f64, x1: f64, y0: f64, y1: f64, graded_vertex: Option<(f64, f64)>, points: usize) -> Vec<([f64; 2], f64)> {
    let (rx, ry) = match graded_vertex {
        Some((gx, gy)) => (graded_on(x0, x1, gx), graded_on(y0, y1, gy)),
        None => (gauss_on(x0, x1, points), gauss_on(y0, y1, points)),
    };
    let mut out = Vec::with_capacity(rx.len() * ry.len());
    for &(y, wy) in &ry {
        for &(x, wx) in &rx {
            out.push(([x, y], wx * wy));
        }
    }
    out
}

/// Polar rule on the sector `r < radius`, `theta0 < theta < theta1`, graded
/// towards `r = 0`; returns `(r, theta, weight)` with the Jacobian `r`
/// folded into the weight.
pub fn sector_rule(radius: f64, theta0: f64, theta1: f64, angular_points: usize) -> Vec<(f64, f64, f64)> {
    let radial = graded_on(0.0, radius, 0.0);
    let angular = gauss_on(theta0, theta1, angular_points);
    let mut out = Vec::with_capacity(radial.len() * angular.len());
    for &(r, wr) in &radial {
        for &(th, wt) in &angular {
            out.push((r, th, wr * wt * r));
        }
    }
    out
}

/// Seven-point degree-5 rule on a triangle: barycentric coordinates and
/// weights normalized to sum to one (multiply by the area).
pub fn triangle_rule() -> [([f64; 3], f64); 7] {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const W1: f64 = 0.132_394_152_788_506_2;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_3;
    const W2: f64 = 0.125_939_180_544_827_1;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
}
