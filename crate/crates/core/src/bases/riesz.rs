use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::par;

use super::hierarchical::NodalGrid;
use super::{haar, BasisDescriptor, BasisKind, Domain, Index, SobolevWeight};

/// Mode cutoff of the spectral `H^s` norm on the interval,
/// `||v||^2 = sum_{k <= K} (k pi)^{2s} <v, sqrt(2) sin(k pi .)>^2`.
pub const SPECTRAL_MODES: u32 = 1 << 15;

const MAX_GRAM_SIZE: usize = 4096;

/// Riesz constants `A <= B` and the condition `C = B / A`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RieszBounds {
    pub lower: f64,
    pub upper: f64,
    pub condition: f64,
}

impl RieszBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0) || !(upper >= lower) || !upper.is_finite() {
            return Err(Error::Domain(format!("invalid Riesz bounds A = {lower}, B = {upper}")));
        }
        Ok(RieszBounds {
            lower,
            upper,
            condition: upper / lower,
        })
    }

    pub fn orthonormal() -> Self {
        RieszBounds {
            lower: 1.0,
            upper: 1.0,
            condition: 1.0,
        }
    }

    /// Bounds of the basis rescaled by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        RieszBounds {
            lower: self.lower * alpha,
            upper: self.upper * alpha,
            condition: self.condition,
        }
    }
}

/// Gram matrix of the rescaled functions `psi / weight(psi)` in the `H^s`
/// norm selected by `norm`.
///
/// Supported: sine bases (spectral norm, exact), Haar in `L2` on every
/// domain (exact), Haar on the interval in the spectral `H^s` norm with
/// [`SPECTRAL_MODES`] modes, and the hierarchical basis in the `H^1`
/// seminorm (exact P1 energy).
pub fn gram_matrix(basis: &BasisDescriptor, norm: &SobolevWeight) -> Result<DMatrix<f64>> {
    gram_matrix_with_modes(basis, norm, SPECTRAL_MODES)
}

fn gram_matrix_with_modes(basis: &BasisDescriptor, norm: &SobolevWeight, modes: u32) -> Result<DMatrix<f64>> {
    let n = basis.len();
    if n > MAX_GRAM_SIZE {
        return Err(Error::Config(format!(
            "Gram matrix of size {n} exceeds the dense limit {MAX_GRAM_SIZE}"
        )));
    }
    let s = norm.smoothness;
    let indices = basis.indices();
    match basis.id.kind {
        BasisKind::Sine => Ok(DMatrix::from_fn(n, n, |a, b| {
            if a != b {
                return 0.0;
            }
            let Index::Mode(m) = indices[a] else { unreachable!() };
            (PI * m.frequency()).powf(2.0 * s) / norm.weight(&indices[a]).powi(2)
        })),
        BasisKind::Haar if s == 0.0 => haar_l2_gram(basis),
        BasisKind::Haar if basis.id.domain == Domain::Interval => {
            let frame = SpectralFrame::new(basis, s, modes);
            Ok(frame.gram())
        }
        BasisKind::Haar => Err(Error::Config(
            "Haar Gram matrices in H^s, s != 0, are only available on the interval".into(),
        )),
        BasisKind::Hierarchical if s == 1.0 => hierarchical_energy_gram(basis),
        BasisKind::Hierarchical => Err(Error::Config(
            "the hierarchical basis Gram matrix is only available in H^1".into(),
        )),
    }
}

fn haar_l2_gram(basis: &BasisDescriptor) -> Result<DMatrix<f64>> {
    let domain = basis.id.domain;
    let j = basis.levels().unwrap_or(0);
    let cells_per_side = 1usize << j;
    let h = 1.0 / cells_per_side as f64;
    let mut centers: Vec<Vec<f64>> = Vec::new();
    for origin in haar::unit_cells(domain) {
        let rows = if domain.dim() == 1 { 1 } else { cells_per_side };
        for iy in 0..rows {
            for ix in 0..cells_per_side {
                let x = origin[0] as f64 + (ix as f64 + 0.5) * h;
                if domain.dim() == 1 {
                    centers.push(vec![x]);
                } else {
                    centers.push(vec![x, origin[1] as f64 + (iy as f64 + 0.5) * h]);
                }
            }
        }
    }
    let vol = h.powi(domain.dim() as i32);
    let values = par::map(basis.indices(), |idx| {
        centers
            .iter()
            .map(|p| basis.eval(idx, p).expect("cell centers are inside"))
            .collect::<Vec<f64>>()
    });
    let n = values.len();
    let rows = par::map_range(0..n, |a| {
        (0..n)
            .map(|b| values[a].iter().zip(&values[b]).map(|(x, y)| x * y).sum::<f64>() * vol)
            .collect::<Vec<f64>>()
    });
    Ok(DMatrix::from_fn(n, n, |a, b| rows[a][b]))
}

fn hierarchical_energy_gram(basis: &BasisDescriptor) -> Result<DMatrix<f64>> {
    let domain = basis.id.domain;
    let level = basis.levels().unwrap_or(0);
    let grids = par::map(basis.indices(), |idx| {
        let Index::Wavelet(w) = idx else { unreachable!() };
        let scale = 2f64.powi(-(w.level as i32));
        NodalGrid::interpolate(domain, level, |x, y| {
            scale * super::hierarchical::eval(w, &[x, y])
        })
    });
    let n = grids.len();
    let rows = par::map_range(0..n, |a| {
        (0..n).map(|b| grids[a].energy_inner(&grids[b])).collect::<Vec<f64>>()
    });
    Ok(DMatrix::from_fn(n, n, |a, b| rows[a][b]))
}

/// Riesz bounds from the extreme eigenvalues of the Gram matrix:
/// `A = sqrt(lambda_min)`, `B = sqrt(lambda_max)`.
pub fn riesz_bounds(basis: &BasisDescriptor, norm: &SobolevWeight) -> Result<RieszBounds> {
    riesz_bounds_with_modes(basis, norm, SPECTRAL_MODES)
}

pub fn riesz_bounds_with_modes(basis: &BasisDescriptor, norm: &SobolevWeight, modes: u32) -> Result<RieszBounds> {
    let gram = gram_matrix_with_modes(basis, norm, modes)?;
    bounds_from_gram(gram)
}

pub(crate) fn bounds_from_gram(gram: DMatrix<f64>) -> Result<RieszBounds> {
    let eig = SymmetricEigen::new(gram);
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if !(min > 0.0) {
        return Err(Error::LinearAlgebra {
            message: format!("Gram matrix is not positive definite (lambda_min = {min:e})"),
            condition: if min != 0.0 { (max / min).abs() } else { f64::INFINITY },
        });
    }
    RieszBounds::new(min.sqrt(), max.sqrt())
}

/// Sine coefficients of the rescaled Haar functions `2^{-js} psi` on the
/// interval, used to evaluate the spectral `H^s` norm of Haar expansions.
#[derive(Clone, Debug)]
pub struct SpectralFrame {
    pub smoothness: f64,
    pub modes: u32,
    indices: Vec<Index>,
    rows: Vec<Vec<f64>>,
    mode_weights: Vec<f64>,
}

impl SpectralFrame {
    pub fn new(basis: &BasisDescriptor, smoothness: f64, modes: u32) -> Self {
        assert!(
            basis.id.kind == BasisKind::Haar && basis.id.domain == Domain::Interval,
            "spectral frames are built for interval Haar bases"
        );
        let weight = SobolevWeight::new(smoothness);
        let rows = par::map(basis.indices(), |idx| {
            let Index::Wavelet(w) = idx else { unreachable!() };
            let r = 1.0 / weight.weight(idx);
            (1..=modes).map(|k| r * haar::sine_coefficient(w, k)).collect::<Vec<f64>>()
        });
        let mode_weights = (1..=modes).map(|k| (k as f64 * PI).powf(2.0 * smoothness)).collect();
        SpectralFrame {
            smoothness,
            modes,
            indices: basis.indices().to_vec(),
            rows,
            mode_weights,
        }
    }

    pub fn indices(&self) -> &[Index] {
        &self.indices
    }

    /// Sine coefficients of `h_i` for modes `1..=modes`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.rows.len();
        let rows = par::map_range(0..n, |a| {
            (0..n)
                .map(|b| {
                    self.rows[a]
                        .iter()
                        .zip(&self.rows[b])
                        .zip(&self.mode_weights)
                        .map(|((x, y), w)| x * y * w)
                        .sum::<f64>()
                })
                .collect::<Vec<f64>>()
        });
        DMatrix::from_fn(n, n, |a, b| rows[a][b])
    }

    /// Spectral `H^s` norm of the function with sine coefficients `sine`
    /// (modes `1..`, padded with zeros).
    pub fn norm_of_sine(&self, sine: &[f64]) -> f64 {
        sine.iter()
            .zip(&self.mode_weights)
            .map(|(c, w)| w * c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Sine coefficients of `sum_i x_i h_i`.
    pub fn synthesize(&self, coeffs: &[(usize, f64)]) -> Vec<f64> {
        let mut out = vec![0.0; self.modes as usize];
        for &(i, x) in coeffs {
            for (o, r) in out.iter_mut().zip(&self.rows[i]) {
                *o += x * r;
            }
        }
        out
    }

    /// `<v, h_i>` in L2 scaled back to Riesz coordinates: for
    /// `v = sum_k v_k sqrt(2) sin(k pi x)` the coordinate of `h_i` in the
    /// rescaled Haar expansion is `weight_i * <v, psi_i>`.
    pub fn analyze(&self, sine: &[f64]) -> Vec<f64> {
        let weight = SobolevWeight::new(self.smoothness);
        par::map_range(0..self.rows.len(), |i| {
            let w = weight.weight(&self.indices[i]);
            // rows hold psi/w, so <v, psi> = w * <v, row>
            w * w * sine.iter().zip(&self.rows[i]).map(|(a, b)| a * b).sum::<f64>()
        })
    }
}
