//! Points of a finite-dimensional subspace of sequence space that attain
//! their sup-norm on as many coordinates as the subspace has dimensions,
//! found by exhaustive active-set search.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bases::RieszBounds;
use crate::error::{Error, Result};
use crate::par;

pub const MAX_SUBSPACE: usize = 6;
pub const MAX_AMBIENT: usize = 16;
/// Absolute tolerance for "attains the sup-norm".
pub const EQUIOSCILLATION_TOL: f64 = 1e-9;

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Returns `y` in the column span of `subspace` with `||y||_inf = 1` and at
/// least `n = subspace.ncols()` coordinates equal to `+-1`.
///
/// Candidates are enumerated as (active coordinate set, sign pattern) in
/// lexicographic order, with the first active sign fixed to `+1`; the first
/// admissible candidate is returned, so the result is deterministic.
pub fn equioscillation_point(subspace: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (big_n, n) = subspace.shape();
    if n == 0 || n > MAX_SUBSPACE || big_n > MAX_AMBIENT || n > big_n {
        return Err(Error::Range(format!(
            "equioscillation search supports 1 <= n <= {MAX_SUBSPACE}, n <= N <= {MAX_AMBIENT}; got n = {n}, N = {big_n}"
        )));
    }
    let sv = subspace.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::LinearAlgebra {
            message: "subspace columns are linearly dependent".into(),
            condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        });
    }
    let sets = combinations(big_n, n);
    let patterns = 1usize << (n - 1);
    let found = par::find_map_first(0..sets.len() * patterns, |c| {
        let set = &sets[c / patterns];
        let bits = c % patterns;
        let signs = DVector::from_fn(n, |i, _| if i > 0 && bits >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 });
        let rows = DMatrix::from_fn(n, n, |i, j| subspace[(set[i], j)]);
        let lu = rows.lu();
        let det = lu.determinant();
        if det.abs() < 1e-14 {
            return None;
        }
        let coeffs = lu.solve(&signs)?;
        let y = subspace * coeffs;
        let sup = y.amax();
        (sup <= 1.0 + EQUIOSCILLATION_TOL).then(|| y.iter().map(|v| v / sup.max(1.0)).collect::<Vec<f64>>())
    });
    found.ok_or_else(|| Error::Numerical {
        message: "no active set yields a certified equioscillating point".into(),
        residual: smin / smax,
    })
}

/// Number of coordinates with `|y_i| >= ||y||_inf - tol`.
pub fn active_count(y: &[f64], tol: f64) -> usize {
    let sup = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    y.iter().filter(|v| v.abs() >= sup - tol).count()
}

/// Brute-force sweep over a two-dimensional subspace: the largest number of
/// coordinates attaining the sup-norm within relative tolerance `rel_tol`,
/// over `angles` equally spaced directions of the half circle.
pub fn sweep_max_active(subspace: &DMatrix<f64>, angles: usize, rel_tol: f64) -> usize {
    assert_eq!(subspace.ncols(), 2, "sweep is two-dimensional");
    let per: Vec<usize> = par::map_range(0..angles, |a| {
        let th = std::f64::consts::PI * a as f64 / angles as f64;
        let y = subspace.column(0) * th.cos() + subspace.column(1) * th.sin();
        let sup = y.amax();
        y.iter().filter(|v| v.abs() >= sup * (1.0 - rel_tol)).count()
    });
    per.into_iter().max().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Report {
    /// `A sqrt(n) ||y||_inf`.
    pub lhs: f64,
    /// `||sum_i y_i h_i||_H`.
    pub rhs: f64,
    pub n: usize,
}

/// Checks `A sqrt(n) ||y||_inf <= ||sum y_i h_i||_H + 1e-9`, where
/// `target_norm` evaluates the `H`-norm of the expansion with coefficients
/// `y`.
pub fn lemma3_certificate(
    y: &[f64],
    bounds: &RieszBounds,
    n: usize,
    target_norm: &dyn Fn(&[f64]) -> f64,
) -> Result<Lemma3Report> {
    let sup = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lhs = bounds.lower * (n as f64).sqrt() * sup;
    let rhs = target_norm(y);
    if lhs > rhs + EQUIOSCILLATION_TOL {
        return Err(Error::Invariant(format!(
            "A sqrt(n) ||y||_inf = {lhs:e} exceeds ||y||_H = {rhs:e}"
        )));
    }
    Ok(Lemma3Report { lhs, rhs, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn l2(y: &[f64]) -> f64 {
        y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(6, 2).len(), 15);
        assert_eq!(combinations(12, 4).len(), 495);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn one_dimensional_span() {
        let v = DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 0.0]);
        assert_eq!(equioscillation_point(&v).unwrap(), vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn coordinate_plane() {
        let v = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let y = equioscillation_point(&v).unwrap();
        assert_eq!((y[0].abs(), y[1].abs(), y[2]), (1.0, 1.0, 0.0));
    }

    #[test]
    fn random_plane_matches_sweep() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let v = DMatrix::from_fn(6, 2, |_, _| rng.random_range(-1.0..1.0));
        let y = equioscillation_point(&v).unwrap();
        assert!(active_count(&y, EQUIOSCILLATION_TOL) >= 2);
        assert!(sweep_max_active(&v, 1_000_000, 1e-5) >= 2);
        // y lies in the span
        let c = v.clone().svd(true, true).solve(&DVector::from_vec(y.clone()), 1e-14).unwrap();
        assert!((&v * c - DVector::from_vec(y.clone())).amax() < 1e-12);
        let rep = lemma3_certificate(&y, &RieszBounds::orthonormal(), 2, &l2).unwrap();
        assert!((rep.lhs - 2f64.sqrt()).abs() < 1e-12 && rep.rhs >= rep.lhs);
    }

    #[test]
    fn certificate_equality_and_scaling() {
        let y = [1.0, -1.0, 1.0, 0.0];
        let r = lemma3_certificate(&y, &RieszBounds::orthonormal(), 3, &l2).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-15);
        let half = RieszBounds::new(0.5, 1.0).unwrap();
        let h = lemma3_certificate(&y, &half, 3, &l2).unwrap();
        assert!((h.lhs - r.lhs / 2.0).abs() < 1e-15);
        assert!(matches!(
            lemma3_certificate(&y, &RieszBounds::new(2.0, 2.0).unwrap(), 3, &l2),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(equioscillation_point(&DMatrix::zeros(17, 1)), Err(Error::Range(_))));
        assert!(matches!(equioscillation_point(&DMatrix::zeros(8, 7)), Err(Error::Range(_))));
        let dep = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(equioscillation_point(&dep), Err(Error::LinearAlgebra { .. })));
    }
}
