//! Worst-case error of the sampling algorithm on the interval: interpolate
//! `f` piecewise linearly from its values at `i / (n+1)`, `i = 1..n`, then
//! solve `-u'' = f` exactly. The error operator `S (I - P_n)` decouples
//! over alias classes `j = +-r (mod 2(n+1))` of sine modes, which keeps the
//! computation to a set of small dense SVDs.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::par;

use super::{CurveMeta, WidthCurve, WidthKind};

/// Sine modes kept per alias period: the cutoff is `MODE_FACTOR * (n+1)`.
pub const MODE_FACTOR: usize = 64;

/// Sine coefficient factor of the interpolation, `(P e_k)_j = hat(j) S_jk`.
fn hat_factor(j: usize, h: f64) -> f64 {
    let x = j as f64 * PI;
    4.0 * (1.0 - (x * h).cos()) / (x * x * h)
}

/// Discrete sine product `sum_i sin(k pi x_i) sin(j pi x_i)` in closed form.
fn alias(j: usize, k: usize, nodes: usize) -> f64 {
    let period = 2 * nodes;
    let mut v = 0.0;
    if (j + period - k % period) % period == 0 {
        v += nodes as f64 / 2.0;
    }
    if (j + k) % period == 0 {
        v -= nodes as f64 / 2.0;
    }
    v
}

fn class_modes(r: usize, nodes: usize, cutoff: usize) -> Vec<usize> {
    let period = 2 * nodes;
    let mut modes: Vec<usize> = (0..)
        .flat_map(|m| [m * period + r, m * period + period - r])
        .take_while(|&j| j <= cutoff + period)
        .filter(|&j| j >= 1 && j <= cutoff)
        .collect();
    modes.sort_unstable();
    modes.dedup();
    modes
}

/// Matrix of `S (I - P_n)` from the `H^{t-1}` sine sequence space to the
/// `H^1` one, restricted to the alias class of `r`.
fn class_block(t: f64, samples: usize, r: usize, cutoff: usize) -> DMatrix<f64> {
    let nodes = samples + 1;
    let h = 1.0 / nodes as f64;
    let modes = class_modes(r, nodes, cutoff);
    let m = modes.len();
    DMatrix::from_fn(m, m, |a, b| {
        let (j, k) = (modes[a], modes[b]);
        let p = hat_factor(j, h) * alias(j, k, nodes);
        let id = if a == b { 1.0 } else { 0.0 };
        (id - p) / (j as f64 * PI) / (k as f64 * PI).powf(t - 1.0)
    })
}

fn check(t: f64, samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::Domain("the sampling algorithm needs at least one sample".into()));
    }
    if !(t > 1.5) {
        return Err(Error::Domain(format!(
            "point evaluation needs source smoothness t - 1 > 1/2, got t = {t}"
        )));
    }
    Ok(())
}

/// Worst-case `H^1` error over the unit ball of `H^{t-1}` for `n` samples.
pub fn sampling_worst_case(t: f64, samples: usize) -> Result<f64> {
    sampling_worst_case_with_cutoff(t, samples, MODE_FACTOR * (samples + 1))
}

pub fn sampling_worst_case_with_cutoff(t: f64, samples: usize, cutoff: usize) -> Result<f64> {
    check(t, samples)?;
    let nodes = samples + 1;
    // classes 0 and n+1 are not seen by the samples: P vanishes there
    let unseen = (nodes as f64 * PI).powf(-t);
    let blocks = par::map_range(1..nodes, |r| {
        class_block(t, samples, r, cutoff)
            .singular_values()
            .max()
    });
    Ok(blocks.into_iter().fold(unseen, f64::max))
}

/// `H^1` error of the sampling algorithm applied to the orthonormal sine
/// mode `k`, divided by the `H^{t-1}` norm of that mode.
pub fn sampling_error_for_mode(t: f64, samples: usize, k: usize) -> Result<f64> {
    check(t, samples)?;
    let nodes = samples + 1;
    let cutoff = MODE_FACTOR * nodes;
    let r = k % (2 * nodes);
    let r = r.min(2 * nodes - r);
    if r == 0 || r == nodes {
        return Ok((k as f64 * PI).powf(-t));
    }
    let modes = class_modes(r, nodes, cutoff.max(k));
    let b = class_block(t, samples, r, cutoff.max(k));
    let col = modes.iter().position(|&j| j == k).expect("mode in class");
    Ok(b.column(col).norm())
}

pub fn sampling_curve(t: f64, ns: &[usize], meta: CurveMeta) -> Result<WidthCurve> {
    let values = ns
        .iter()
        .map(|&n| sampling_worst_case(t, n).map(|v| (n, v)))
        .collect::<Result<Vec<_>>>()?;
    WidthCurve::new(WidthKind::Sampling, values, meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `||u'||_{L2}` for `-u'' = f - I_n f` with `f = sqrt(2) sin(k pi x)`,
    /// from the primitive `G` of the error: `u' = mean(G) - G`.
    fn direct_error(samples: usize, k: usize) -> f64 {
        let nodes = samples + 1;
        let h = 1.0 / nodes as f64;
        let kp = k as f64 * PI;
        let f = |x: f64| 2f64.sqrt() * (kp * x).sin();
        let big_f = |x: f64| 2f64.sqrt() * (1.0 - (kp * x).cos()) / kp;
        let vals: Vec<f64> = (0..=nodes).map(|i| if i == 0 || i == nodes { 0.0 } else { f(i as f64 * h) }).collect();
        // primitive of the interpolant at cell starts
        let mut cum = vec![0.0; nodes + 1];
        for i in 0..nodes {
            cum[i + 1] = cum[i] + h * (vals[i] + vals[i + 1]) / 2.0;
        }
        let g = |x: f64| {
            let i = ((x / h) as usize).min(nodes - 1);
            let s = x - i as f64 * h;
            let slope = (vals[i + 1] - vals[i]) / h;
            big_f(x) - (cum[i] + vals[i] * s + slope * s * s / 2.0)
        };
        let (gx, gw) = crate::problems::quadrature::gauss_legendre(10);
        let sub = 8 * (k / nodes + 1);
        let mut pts = Vec::new();
        for c in 0..nodes * sub {
            let a = c as f64 * h / sub as f64;
            let len = h / sub as f64;
            for (x, w) in gx.iter().zip(&gw) {
                pts.push((a + (x + 1.0) / 2.0 * len, w * len / 2.0));
            }
        }
        let mean: f64 = pts.iter().map(|(x, w)| w * g(*x)).sum();
        pts.iter().map(|(x, w)| w * (g(*x) - mean).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn mode_errors_match_direct_computation() {
        let t = 2.0;
        for (n, k) in [(7, 1), (7, 3), (7, 13), (15, 5), (15, 40)] {
            let direct = direct_error(n, k) / (k as f64 * PI).powf(t - 1.0);
            let ours = sampling_error_for_mode(t, n, k).unwrap();
            assert!((direct - ours).abs() <= 1e-3 * direct, "n={n} k={k}: {direct} vs {ours}");
            assert!(ours <= sampling_worst_case(t, n).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn alias_identity_against_direct_sum() {
        let nodes = 6;
        for j in 1..30 {
            for k in 1..30 {
                let direct: f64 = (1..nodes)
                    .map(|i| {
                        let x = i as f64 / nodes as f64;
                        (k as f64 * PI * x).sin() * (j as f64 * PI * x).sin()
                    })
                    .sum();
                assert!((direct - alias(j, k, nodes)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cutoff_is_converged() {
        let a = sampling_worst_case_with_cutoff(2.0, 16, 32 * 17).unwrap();
        let b = sampling_worst_case(2.0, 16).unwrap();
        assert!((a - b).abs() < 0.02 * b);
    }

    #[test]
    fn decays_like_one_over_n() {
        let a = sampling_worst_case(2.0, 32).unwrap();
        let b = sampling_worst_case(2.0, 64).unwrap();
        let slope = (b / a).ln() / (65f64 / 33.0).ln();
        assert!((slope + 1.0).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn rejects_rough_sources() {
        assert!(sampling_worst_case(1.0, 4).is_err());
        assert!(sampling_worst_case(2.0, 0).is_err());
    }
}
