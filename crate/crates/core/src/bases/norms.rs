use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::{CoeffVector, Index};

/// Diagonal weight realizing an `H^s` norm on coefficients: `2^{js}` on
/// level `j` of a multilevel basis, `(pi |k|)^s` on spectral mode `k`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SobolevWeight {
    pub smoothness: f64,
}

impl SobolevWeight {
    pub fn new(smoothness: f64) -> Self {
        SobolevWeight { smoothness }
    }

    pub fn l2() -> Self {
        SobolevWeight { smoothness: 0.0 }
    }

    pub fn weight(&self, index: &Index) -> f64 {
        match index {
            Index::Wavelet(w) => 2f64.powf(w.level as f64 * self.smoothness),
            Index::Mode(m) => (PI * m.frequency()).powf(self.smoothness),
        }
    }
}

/// Weighted l2 norm `(sum (w_i c_i)^2)^{1/2}`.
pub fn sequence_norm(coeffs: &CoeffVector, weight: &SobolevWeight) -> f64 {
    coeffs
        .iter()
        .map(|(i, c)| (weight.weight(i) * c).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn lp(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Besov norm from wavelet coefficients: l_p over each level, scaled by
/// `2^{j(s + d(1/2 - 1/p))}`, then l_q over levels. Scaling coefficients
/// count as level 0.
pub fn besov_norm(coeffs: &CoeffVector, s: f64, p: f64, q: f64, d: u32) -> Result<f64> {
    if !(p > 0.0) || !(q > 0.0) {
        return Err(Error::Domain(format!("Besov exponents must be positive, got p = {p}, q = {q}")));
    }
    let mut by_level: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (idx, c) in coeffs.iter() {
        match idx {
            Index::Wavelet(w) => by_level.entry(w.level).or_default().push(*c),
            Index::Mode(_) => {
                return Err(Error::Domain("Besov norms are defined on wavelet coefficients only".into()))
            }
        }
    }
    let exponent = s + d as f64 * (0.5 - 1.0 / p);
    let per_level: Vec<f64> = by_level
        .iter()
        .map(|(&j, values)| 2f64.powf(j as f64 * exponent) * lp(values, p))
        .collect();
    Ok(lp(&per_level, q))
}
