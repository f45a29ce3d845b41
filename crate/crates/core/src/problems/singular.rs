//! Corner singularity functions `zeta(r) r^lambda sin(lambda theta)` with a
//! C^2 polynomial cutoff `zeta`, and their Laplacians.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bases::Domain;
use crate::error::{Error, Result};

/// Cutoff equal to one for `r <= radius / 2`, zero for `r >= radius`, with
/// the quintic transition `q(s) = 1 - s^3 (10 - 15 s + 6 s^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub radius: f64,
}

impl Cutoff {
    fn local(&self, r: f64) -> Option<f64> {
        let half = self.radius / 2.0;
        if r <= half || r >= self.radius {
            None
        } else {
            Some((r - half) / half)
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self.local(r) {
            Some(s) => 1.0 - s.powi(3) * (10.0 - 15.0 * s + 6.0 * s * s),
            None if r < self.radius => 1.0,
            None => 0.0,
        }
    }

    pub fn d1(&self, r: f64) -> f64 {
        self.local(r)
            .map(|s| -30.0 * s * s * (1.0 - s).powi(2) / (self.radius / 2.0))
            .unwrap_or(0.0)
    }

    pub fn d2(&self, r: f64) -> f64 {
        self.local(r)
            .map(|s| -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (self.radius / 2.0).powi(2))
            .unwrap_or(0.0)
    }
}

/// A polygon corner: vertex, direction of the edge where `theta = 0`, and
/// interior angle measured counterclockwise from that edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub vertex: [f64; 2],
    pub start_angle: f64,
    pub angle: f64,
}

/// Index of the reentrant corner in [`lshape_corners`].
pub const REENTRANT: usize = 0;

/// Corners of the L-shape, counterclockwise from the reentrant one.
pub fn lshape_corners() -> [Corner; 6] {
    let c = |x: f64, y: f64, start: f64, angle: f64| Corner {
        vertex: [x, y],
        start_angle: start,
        angle,
    };
    [
        c(0.0, 0.0, 0.0, 1.5 * PI),
        c(1.0, 0.0, 0.5 * PI, 0.5 * PI),
        c(1.0, 1.0, PI, 0.5 * PI),
        c(-1.0, 1.0, 1.5 * PI, 0.5 * PI),
        c(-1.0, -1.0, 0.0, 0.5 * PI),
        c(0.0, -1.0, 0.5 * PI, 0.5 * PI),
    ]
}

/// Cutoff radius on the L-shape: a quarter of the shortest edge.
pub const LSHAPE_CUTOFF: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularFunction {
    pub domain: Domain,
    pub corner_index: usize,
    pub corner: Corner,
    pub mode: u32,
    pub exponent: f64,
    pub cutoff: Cutoff,
    pub log_flag: bool,
}

impl SingularFunction {
    pub fn new(domain: Domain, corner_index: usize, corner: Corner, mode: u32, cutoff: Cutoff) -> Result<Self> {
        if mode == 0 {
            return Err(Error::Domain("singular function mode must be at least 1".into()));
        }
        if !(corner.angle > 0.0 && corner.angle < 2.0 * PI) || !(cutoff.radius > 0.0) {
            return Err(Error::Domain(format!(
                "invalid corner angle {} or cutoff radius {}",
                corner.angle, cutoff.radius
            )));
        }
        let exponent = mode as f64 * PI / corner.angle;
        let log_flag = (exponent - exponent.round()).abs() < 1e-12;
        Ok(SingularFunction {
            domain,
            corner_index,
            corner,
            mode,
            exponent: if log_flag { exponent.round() } else { exponent },
            cutoff,
            log_flag,
        })
    }

    /// `S_{l,m}` at corner `l` of the L-shape.
    pub fn lshape(corner_index: usize, mode: u32) -> Result<Self> {
        let corners = lshape_corners();
        let corner = *corners
            .get(corner_index)
            .ok_or_else(|| Error::Config(format!("the L-shape has no corner {corner_index}")))?;
        Self::new(Domain::LShape, corner_index, corner, mode, Cutoff { radius: LSHAPE_CUTOFF })
    }

    /// Local polar coordinates `(r, theta)` with `theta` in `[0, 2 pi)`.
    pub fn polar(&self, point: [f64; 2]) -> (f64, f64) {
        let dx = point[0] - self.corner.vertex[0];
        let dy = point[1] - self.corner.vertex[1];
        let r = dx.hypot(dy);
        let theta = (dy.atan2(dx) - self.corner.start_angle).rem_euclid(2.0 * PI);
        // the edge theta = omega may come back as a tiny negative angle
        let theta = if theta > self.corner.angle && 2.0 * PI - theta < 1e-12 { 0.0 } else { theta };
        (r, theta)
    }

    fn check(&self, point: [f64; 2]) -> Result<()> {
        if !self.domain.contains(&point) {
            return Err(Error::Domain(format!("point {point:?} is outside the {}", self.domain.name())));
        }
        Ok(())
    }

    /// Harmonic profile without the cutoff and its radial derivative.
    fn profile(&self, r: f64, theta: f64) -> (f64, f64) {
        let l = self.exponent;
        let (s, c) = (l * theta).sin_cos();
        let rl = r.powf(l);
        if self.log_flag {
            let g = rl * (r.ln() * s + theta * c);
            let gr = l * r.powf(l - 1.0) * (r.ln() * s + theta * c) + r.powf(l - 1.0) * s;
            (g, gr)
        } else {
            (rl * s, l * r.powf(l - 1.0) * s)
        }
    }

    pub fn eval(&self, point: [f64; 2]) -> Result<f64> {
        self.check(point)?;
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: [f64; 2]) -> f64 {
        let (r, theta) = self.polar(point);
        if r == 0.0 || r >= self.cutoff.radius {
            return 0.0;
        }
        self.cutoff.value(r) * self.profile(r, theta).0
    }

    /// Harmonic profile `r^l sin(l theta)` (or its logarithmic variant)
    /// without the cutoff.
    pub fn harmonic(&self, point: [f64; 2]) -> f64 {
        let (r, theta) = self.polar(point);
        if r == 0.0 {
            return 0.0;
        }
        self.profile(r, theta).0
    }

    /// Gradient of [`Self::harmonic`] in global coordinates; zero at the
    /// vertex, where it is singular for exponents below one.
    pub fn harmonic_gradient(&self, point: [f64; 2]) -> [f64; 2] {
        let (r, theta) = self.polar(point);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let l = self.exponent;
        let (s, c) = (l * theta).sin_cos();
        let (_, gr) = self.profile(r, theta);
        let gt = if self.log_flag {
            r.powf(l) * (l * r.ln() * c + c - l * theta * s)
        } else {
            l * r.powf(l) * c
        };
        let (sp, cp) = (self.corner.start_angle + theta).sin_cos();
        [gr * cp - gt / r * sp, gr * sp + gt / r * cp]
    }

    /// `Delta S`; nonzero only in the cutoff transition annulus.
    pub fn laplacian(&self, point: [f64; 2]) -> Result<f64> {
        self.check(point)?;
        Ok(self.laplacian_unchecked(point))
    }

    pub(crate) fn laplacian_unchecked(&self, point: [f64; 2]) -> f64 {
        let (r, theta) = self.polar(point);
        let (d1, d2) = (self.cutoff.d1(r), self.cutoff.d2(r));
        if d1 == 0.0 && d2 == 0.0 {
            return 0.0;
        }
        let (g, gr) = self.profile(r, theta);
        g * (d2 + d1 / r) + 2.0 * d1 * gr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::quadrature::gauss_on;

    #[test]
    fn reentrant_exponent_and_values() {
        let s = SingularFunction::lshape(REENTRANT, 1).unwrap();
        assert!((s.exponent - 2.0 / 3.0).abs() < 1e-15);
        assert!(!s.log_flag);
        assert_eq!(s.eval([0.0, 0.0]).unwrap(), 0.0);
        let r = LSHAPE_CUTOFF / 2.0;
        let th = 0.75 * PI;
        let v = s.eval([r * th.cos(), r * th.sin()]).unwrap();
        assert!((v - r.powf(2.0 / 3.0)).abs() < 1e-14);
        assert!(matches!(s.eval([0.5, -0.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn vanishes_on_corner_edges() {
        for (l, corner) in lshape_corners().iter().enumerate() {
            for m in 1..=3 {
                let s = SingularFunction::lshape(l, m).unwrap();
                if s.log_flag {
                    continue;
                }
                for k in 1..10 {
                    let r = 0.02 * k as f64;
                    for th in [corner.start_angle, corner.start_angle + corner.angle] {
                        let p = [corner.vertex[0] + r * th.cos(), corner.vertex[1] + r * th.sin()];
                        assert!(s.eval(p).unwrap().abs() < 1e-12, "corner {l} mode {m} r {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn integer_exponents_use_log_variant() {
        let s = SingularFunction::lshape(4, 1).unwrap();
        assert!(s.log_flag);
        assert_eq!(s.exponent, 2.0);
        // r^2 (log r sin 2t + t cos 2t) at t = pi/4
        let r: f64 = 0.1;
        let t = PI / 4.0;
        let p = [-1.0 + r * t.cos(), -1.0 + r * t.sin()];
        assert!((s.eval(p).unwrap() - r * r * r.ln()).abs() < 1e-14);
        assert!(!SingularFunction::lshape(REENTRANT, 2).unwrap().log_flag);
    }

    #[test]
    fn cutoff_derivatives_match_differences() {
        let c = Cutoff { radius: 0.25 };
        for r in [0.13, 0.16, 0.2, 0.24] {
            let h = 1e-5;
            let d1 = (c.value(r + h) - c.value(r - h)) / (2.0 * h);
            let d2 = (c.value(r + h) - 2.0 * c.value(r) + c.value(r - h)) / (h * h);
            assert!((d1 - c.d1(r)).abs() < 1e-6);
            assert!((d2 - c.d2(r)).abs() < 1e-3);
        }
        assert_eq!(c.value(0.1), 1.0);
        assert_eq!(c.value(0.3), 0.0);
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        for (l, m) in [(REENTRANT, 1), (REENTRANT, 2), (4, 1)] {
            let s = SingularFunction::lshape(l, m).unwrap();
            let v = s.corner.vertex;
            for (r, t) in [(0.14, 0.3), (0.18, 1.0), (0.22, 0.5 * s.corner.angle)] {
                let th = s.corner.start_angle + t;
                let p = [v[0] + r * th.cos(), v[1] + r * th.sin()];
                let h = 1e-4;
                let f = |dx: f64, dy: f64| s.eval([p[0] + dx, p[1] + dy]).unwrap();
                let fd = (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - 4.0 * f(0.0, 0.0)) / (h * h);
                let exact = s.laplacian(p).unwrap();
                assert!((fd - exact).abs() < 1e-4 * exact.abs().max(1.0), "{fd} vs {exact}");
            }
        }
    }

    #[test]
    fn weakly_harmonic_inside_cutoff() {
        // int S * Delta(phi) for a bump phi supported where zeta = 1
        let s = SingularFunction::lshape(REENTRANT, 1).unwrap();
        let (cx, cy, a) = (-0.05, 0.05, 0.04);
        let lap_phi = |x: f64, y: f64| {
            let q = ((x - cx).powi(2) + (y - cy).powi(2)) / (a * a);
            if q >= 1.0 {
                return 0.0;
            }
            // phi = (1 - q)^4; Delta phi = (1/a^2) * [48 q (1-q)^2 - 16 (1-q)^3]
            (48.0 * q * (1.0 - q).powi(2) - 16.0 * (1.0 - q).powi(3)) / (a * a)
        };
        // polar coordinates around the bump centre: Gauss radially, trapezoid in angle
        let mut sum = 0.0;
        let angles = 128;
        for (rho, w) in gauss_on(0.0, a, 30) {
            for k in 0..angles {
                let phi = 2.0 * PI * k as f64 / angles as f64;
                let (x, y) = (cx + rho * phi.cos(), cy + rho * phi.sin());
                sum += w * rho * 2.0 * PI / angles as f64 * s.eval([x, y]).unwrap() * lap_phi(x, y);
            }
        }
        assert!(sum.abs() < 1e-8, "residual {sum}");
    }
}
