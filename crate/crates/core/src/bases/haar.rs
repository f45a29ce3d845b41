//! L2-normalized Haar wavelets on dyadic cubes, the fast transform from
//! finest-level cell averages, and closed-form sine coefficients on (0, 1).

use std::f64::consts::{PI, SQRT_2};

use super::{Domain, WaveletIndex};

/// Lower-left corners (in unit cells) of the unit squares tiling the domain.
pub fn unit_cells(domain: Domain) -> Vec<[i32; 2]> {
    match domain {
        Domain::Interval | Domain::Square => vec![[0, 0]],
        Domain::LShape => vec![[-1, -1], [-1, 0], [0, 0]],
    }
}

pub fn is_valid(domain: Domain, w: &WaveletIndex) -> bool {
    let max_kind = if domain.dim() == 1 { 1 } else { 3 };
    if w.kind == 0 {
        w.level == 0 && domain.cube_inside(0, w.translation)
    } else {
        w.kind <= max_kind && w.level < 30 && domain.cube_inside(w.level, w.translation)
    }
}

/// All Haar indices with wavelet level `< max_level`, sorted.
pub fn enumerate(domain: Domain, max_level: u32) -> Vec<WaveletIndex> {
    let kinds: &[u8] = if domain.dim() == 1 { &[1] } else { &[1, 2, 3] };
    let mut out = Vec::new();
    for cell in unit_cells(domain) {
        out.push(WaveletIndex::new(0, cell, 0));
    }
    for level in 0..max_level {
        let n = 1i32 << level;
        for cell in unit_cells(domain) {
            let ys = if domain.dim() == 1 { 0..1 } else { 0..n };
            for ky in ys {
                for kx in 0..n {
                    let t = if domain.dim() == 1 {
                        [kx, 0]
                    } else {
                        [cell[0] * n + kx, cell[1] * n + ky]
                    };
                    for &kind in kinds {
                        out.push(WaveletIndex::new(level, t, kind));
                    }
                }
            }
        }
    }
    out.sort();
    out
}

fn haar_mother(x: f64) -> f64 {
    if (0.0..0.5).contains(&x) {
        1.0
    } else if (0.5..1.0).contains(&x) {
        -1.0
    } else {
        0.0
    }
}

fn box_fn(x: f64) -> f64 {
    if (0.0..1.0).contains(&x) {
        1.0
    } else {
        0.0
    }
}

/// Point value. Cells are half-open; the closing boundary coordinate 1 is
/// attributed to the last cell.
pub fn eval(dim: usize, w: &WaveletIndex, point: &[f64]) -> f64 {
    let scale = (1u64 << w.level) as f64;
    let local = |x: f64, t: i32| {
        let x = if x >= 1.0 { 1.0 - 1e-15 } else { x };
        x * scale - t as f64
    };
    let x = local(point[0], w.translation[0]);
    if dim == 1 {
        return if w.kind == 0 {
            box_fn(x)
        } else {
            scale.sqrt() * haar_mother(x)
        };
    }
    let y = local(point[1], w.translation[1]);
    let gx = if w.kind & 1 == 1 { haar_mother(x) } else { box_fn(x) };
    let gy = if w.kind & 2 == 2 { haar_mother(y) } else { box_fn(y) };
    let norm = if w.kind == 0 { 1.0 } else { scale };
    norm * gx * gy
}

/// One-dimensional transform. `averages` holds the means of the `2^J` cells
/// of (0, 1); the result holds `<u, psi>` for every index of
/// [`enumerate`]`(Interval, J)`.
pub fn from_cell_averages_1d(averages: &[f64]) -> Vec<(WaveletIndex, f64)> {
    assert!(averages.len().is_power_of_two(), "cell count must be a power of two");
    let levels = averages.len().trailing_zeros();
    let mut out = Vec::with_capacity(averages.len());
    let mut current = averages.to_vec();
    for level in (0..levels).rev() {
        let factor = 2f64.powf(-(level as f64) / 2.0) / 2.0;
        let half = current.len() / 2;
        let mut coarse = Vec::with_capacity(half);
        for k in 0..half {
            let (a, b) = (current[2 * k], current[2 * k + 1]);
            coarse.push(0.5 * (a + b));
            out.push((WaveletIndex::new(level, [k as i32, 0], 1), factor * (a - b)));
        }
        current = coarse;
    }
    out.push((WaveletIndex::new(0, [0, 0], 0), current[0]));
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Two-dimensional transform on one unit square with lower-left corner
/// `origin`. `averages` is row-major (`[iy * n + ix]`) over the `n = 2^J`
/// cells per direction.
pub fn from_cell_averages_2d(origin: [i32; 2], averages: &[f64]) -> Vec<(WaveletIndex, f64)> {
    let n = (averages.len() as f64).sqrt().round() as usize;
    assert!(n * n == averages.len() && n.is_power_of_two(), "expected a 2^J x 2^J grid");
    let levels = n.trailing_zeros();
    let mut out = Vec::with_capacity(averages.len());
    let mut current = averages.to_vec();
    let mut size = n;
    for level in (0..levels).rev() {
        let half = size / 2;
        let factor = 2f64.powi(-(level as i32) - 2);
        let mut coarse = vec![0.0; half * half];
        for ky in 0..half {
            for kx in 0..half {
                let a00 = current[(2 * ky) * size + 2 * kx];
                let a10 = current[(2 * ky) * size + 2 * kx + 1];
                let a01 = current[(2 * ky + 1) * size + 2 * kx];
                let a11 = current[(2 * ky + 1) * size + 2 * kx + 1];
                coarse[ky * half + kx] = 0.25 * (a00 + a10 + a01 + a11);
                let t = [
                    origin[0] * (1 << level) + kx as i32,
                    origin[1] * (1 << level) + ky as i32,
                ];
                out.push((WaveletIndex::new(level, t, 1), factor * (a00 - a10 + a01 - a11)));
                out.push((WaveletIndex::new(level, t, 2), factor * (a00 + a10 - a01 - a11)));
                out.push((WaveletIndex::new(level, t, 3), factor * (a00 - a10 - a01 + a11)));
            }
        }
        current = coarse;
        size = half;
    }
    out.push((WaveletIndex::new(0, origin, 0), current[0]));
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// `<psi_w, sqrt(2) sin(k pi x)>` on the unit interval, exact.
pub fn sine_coefficient(w: &WaveletIndex, k: u32) -> f64 {
    let kp = k as f64 * PI;
    let prim = |x: f64| -(kp * x).cos() / kp;
    if w.kind == 0 {
        return SQRT_2 * (prim(1.0) - prim(0.0));
    }
    let h = 2f64.powi(-(w.level as i32));
    let a = w.translation[0] as f64 * h;
    let m = a + 0.5 * h;
    let b = a + h;
    SQRT_2 * h.powf(-0.5) * ((prim(m) - prim(a)) - (prim(b) - prim(m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{build_basis, BasisKind, Truncation};

    fn cell_centers_1d(j: u32) -> Vec<f64> {
        let n = 1 << j;
        (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
    }

    #[test]
    fn step_function_has_single_coefficient() {
        // chi_[0,1/2) - chi_[1/2,1) sampled on 8 cells
        let avgs: Vec<f64> = (0..8).map(|i| if i < 4 { 1.0 } else { -1.0 }).collect();
        let coeffs = from_cell_averages_1d(&avgs);
        let nonzero: Vec<_> = coeffs.iter().filter(|(_, c)| c.abs() > 1e-15).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].0, WaveletIndex::new(0, [0, 0], 1));
        assert!((nonzero[0].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transform_matches_direct_inner_products_1d() {
        let j = 4;
        let centers = cell_centers_1d(j);
        let avgs: Vec<f64> = centers.iter().map(|x| (3.0 * x).sin() + x * x).collect();
        let coeffs = from_cell_averages_1d(&avgs);
        let h = 1.0 / centers.len() as f64;
        for (w, c) in coeffs {
            // piecewise-constant u: inner product is a cell sum
            let direct: f64 = centers
                .iter()
                .zip(&avgs)
                .map(|(x, a)| a * eval(1, &w, &[*x]) * h)
                .sum();
            assert!((direct - c).abs() < 1e-13, "{w:?}: {direct} vs {c}");
        }
    }

    #[test]
    fn transform_matches_direct_inner_products_2d() {
        let n = 8usize;
        let origin = [-1, 0];
        let avgs: Vec<f64> = (0..n * n)
            .map(|i| ((i % n) as f64 * 0.3).cos() + (i / n) as f64 * 0.1)
            .collect();
        let coeffs = from_cell_averages_2d(origin, &avgs);
        assert_eq!(coeffs.len(), n * n);
        let h = 1.0 / n as f64;
        for (w, c) in coeffs {
            let mut direct = 0.0;
            for iy in 0..n {
                for ix in 0..n {
                    let p = [origin[0] as f64 + (ix as f64 + 0.5) * h, origin[1] as f64 + (iy as f64 + 0.5) * h];
                    direct += avgs[iy * n + ix] * eval(2, &w, &p) * h * h;
                }
            }
            assert!((direct - c).abs() < 1e-13, "{w:?}: {direct} vs {c}");
        }
    }

    #[test]
    fn l2_gram_is_identity() {
        for (domain, j) in [(Domain::Interval, 5), (Domain::Square, 3), (Domain::LShape, 2)] {
            let basis = build_basis(domain, BasisKind::Haar, Truncation::Levels(j)).unwrap();
            let n = 1usize << j;
            let cells: Vec<Vec<f64>> = unit_cells(domain)
                .into_iter()
                .flat_map(|o| {
                    (0..if domain.dim() == 1 { 1 } else { n }).flat_map(move |iy| {
                        (0..n).map(move |ix| {
                            let h = 1.0 / n as f64;
                            if domain.dim() == 1 {
                                vec![(ix as f64 + 0.5) * h]
                            } else {
                                vec![o[0] as f64 + (ix as f64 + 0.5) * h, o[1] as f64 + (iy as f64 + 0.5) * h]
                            }
                        })
                    })
                })
                .collect();
            let vol = (1.0 / n as f64).powi(domain.dim() as i32);
            let values: Vec<Vec<f64>> = basis
                .indices()
                .iter()
                .map(|i| cells.iter().map(|p| basis.eval(i, p).unwrap()).collect())
                .collect();
            for (a, va) in values.iter().enumerate() {
                for (b, vb) in values.iter().enumerate() {
                    let g: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum::<f64>() * vol;
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((g - expect).abs() < 1e-12, "{domain:?} {:?} {:?}", basis.indices()[a], basis.indices()[b]);
                }
            }
        }
    }

    #[test]
    fn sine_coefficients_match_quadrature() {
        let w = WaveletIndex::new(2, [1, 0], 1);
        for k in [1u32, 2, 5, 11] {
            let m = 20000;
            let q: f64 = (0..m)
                .map(|i| {
                    let x = (i as f64 + 0.5) / m as f64;
                    eval(1, &w, &[x]) * SQRT_2 * (k as f64 * PI * x).sin() / m as f64
                })
                .sum();
            assert!((q - sine_coefficient(&w, k)).abs() < 1e-6);
        }
    }
}
