//! Index machinery, basis descriptors, coefficient vectors and the weighted
//! sequence norms that stand in for Sobolev and Besov norms.

pub mod haar;
pub mod hierarchical;
mod norms;
mod riesz;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use norms::{besov_norm, sequence_norm, SobolevWeight};
pub use riesz::{
    gram_matrix, riesz_bounds, riesz_bounds_with_modes, RieszBounds, SpectralFrame, SPECTRAL_MODES,
};

/// Coefficients with magnitude below this are dropped by [`CoeffVector::normalize`].
pub const ZERO_THRESHOLD: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// (0, 1)
    Interval,
    /// (0, 1)^2
    Square,
    /// (-1, 1)^2 without [0, 1) x (-1, 0], reentrant corner at the origin.
    #[serde(rename = "lshape")]
    LShape,
}

impl Domain {
    pub fn dim(self) -> usize {
        match self {
            Domain::Interval => 1,
            Domain::Square | Domain::LShape => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::Interval => "interval",
            Domain::Square => "square",
            Domain::LShape => "lshape",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(Domain::Interval),
            "square" => Ok(Domain::Square),
            "lshape" => Ok(Domain::LShape),
            other => Err(Error::Config(format!("unknown domain '{other}'"))),
        }
    }

    /// Closed-domain membership test with a small slack.
    pub fn contains(self, point: &[f64]) -> bool {
        const EPS: f64 = 1e-14;
        match self {
            Domain::Interval => point.len() == 1 && (-EPS..=1.0 + EPS).contains(&point[0]),
            Domain::Square => {
                point.len() == 2 && point.iter().all(|&c| (-EPS..=1.0 + EPS).contains(&c))
            }
            Domain::LShape => {
                if point.len() != 2 {
                    return false;
                }
                let (x, y) = (point[0], point[1]);
                let in_box = (-1.0 - EPS..=1.0 + EPS).contains(&x) && (-1.0 - EPS..=1.0 + EPS).contains(&y);
                in_box && !(x > EPS && y < -EPS)
            }
        }
    }

    /// Whether the dyadic cube of side `2^-level` with lower corner
    /// `translation * 2^-level` lies inside the domain.
    pub fn cube_inside(self, level: u32, translation: [i32; 2]) -> bool {
        let n = 1i64 << level;
        let (k1, k2) = (translation[0] as i64, translation[1] as i64);
        match self {
            Domain::Interval => translation[1] == 0 && (0..n).contains(&k1),
            Domain::Square => (0..n).contains(&k1) && (0..n).contains(&k2),
            Domain::LShape => {
                (-n..n).contains(&k1) && (-n..n).contains(&k2) && !(k1 >= 0 && k2 < 0)
            }
        }
    }

    /// Whether the grid point `node * 2^-level` is an interior point.
    pub fn node_interior(self, level: u32, node: [i32; 2]) -> bool {
        let n = 1i64 << level;
        let (a, b) = (node[0] as i64, node[1] as i64);
        match self {
            Domain::Interval => node[1] == 0 && a > 0 && a < n,
            Domain::Square => a > 0 && a < n && b > 0 && b < n,
            Domain::LShape => a > -n && a < n && b > -n && b < n && !(a >= 0 && b <= 0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    /// L2-normalized Haar wavelets on dyadic cubes.
    Haar,
    /// `sqrt(2) sin(k pi x)` and its tensor products.
    Sine,
    /// Piecewise-linear hierarchical hat functions on the uniform
    /// triangulation, scaled by `2^j` per level.
    Hierarchical,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Haar => "haar",
            BasisKind::Sine => "sine",
            BasisKind::Hierarchical => "hierarchical",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(BasisKind::Haar),
            "sine" => Ok(BasisKind::Sine),
            "hierarchical" => Ok(BasisKind::Hierarchical),
            other => Err(Error::Config(format!("unknown basis kind '{other}'"))),
        }
    }
}

/// Address of one multilevel basis function.
///
/// For Haar, `translation` is the lower-left corner of the supporting cube in
/// units of `2^-level`. For the hierarchical basis it is the grid node. The
/// second component is zero in one dimension. `kind` 0 is reserved for the
/// scaling functions (Haar) or coarsest nodes (hierarchical) at level 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveletIndex {
    pub level: u32,
    pub translation: [i32; 2],
    pub kind: u8,
}

impl WaveletIndex {
    pub fn new(level: u32, translation: [i32; 2], kind: u8) -> Self {
        WaveletIndex {
            level,
            translation,
            kind,
        }
    }
}

/// Spectral mode `(k, l)`; `l = 0` on the interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex(pub [u32; 2]);

impl ModeIndex {
    /// Euclidean length of the frequency vector, `sqrt(k^2 + l^2)`.
    pub fn frequency(self) -> f64 {
        let [k, l] = self.0;
        ((k as f64).powi(2) + (l as f64).powi(2)).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Index {
    Wavelet(WaveletIndex),
    Mode(ModeIndex),
}

impl From<WaveletIndex> for Index {
    fn from(w: WaveletIndex) -> Self {
        Index::Wavelet(w)
    }
}

impl From<ModeIndex> for Index {
    fn from(m: ModeIndex) -> Self {
        Index::Mode(m)
    }
}

/// Identifies the basis a coefficient vector is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisId {
    pub domain: Domain,
    pub kind: BasisKind,
}

impl BasisId {
    pub fn new(domain: Domain, kind: BasisKind) -> Self {
        BasisId { domain, kind }
    }

    pub fn is_valid(&self, index: &Index) -> bool {
        match (self.kind, index) {
            (BasisKind::Sine, Index::Mode(ModeIndex([k, l]))) => match self.domain {
                Domain::Interval => *k >= 1 && *l == 0,
                Domain::Square => *k >= 1 && *l >= 1,
                Domain::LShape => false,
            },
            (BasisKind::Haar, Index::Wavelet(w)) => haar::is_valid(self.domain, w),
            (BasisKind::Hierarchical, Index::Wavelet(w)) => hierarchical::is_valid(self.domain, w),
            _ => false,
        }
    }
}

/// Finitely supported coefficient sequence in a fixed basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffVector {
    basis: BasisId,
    entries: BTreeMap<Index, f64>,
}

impl CoeffVector {
    pub fn zero(basis: BasisId) -> Self {
        CoeffVector {
            basis,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a vector, rejecting indices that do not belong to `basis`.
    /// Repeated indices are summed.
    pub fn from_entries<I>(basis: BasisId, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Index, f64)>,
    {
        let mut v = CoeffVector::zero(basis);
        for (idx, c) in entries {
            if !basis.is_valid(&idx) {
                return Err(Error::Domain(format!(
                    "index {idx:?} is not valid for {} {} basis",
                    basis.domain.name(),
                    basis.kind.name()
                )));
            }
            if !c.is_finite() {
                return Err(Error::Domain(format!("non-finite coefficient at {idx:?}")));
            }
            *v.entries.entry(idx).or_insert(0.0) += c;
        }
        v.normalize();
        Ok(v)
    }

    /// Sine-series vector from coefficients of modes `1..=coeffs.len()`.
    pub fn sine_series(coeffs: &[f64]) -> Self {
        let entries = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (Index::Mode(ModeIndex([i as u32 + 1, 0])), c));
        CoeffVector::from_entries(BasisId::new(Domain::Interval, BasisKind::Sine), entries)
            .expect("sine modes are valid")
    }

    /// Drops stored zeros.
    pub fn normalize(&mut self) {
        self.entries.retain(|_, c| c.abs() >= ZERO_THRESHOLD);
    }

    pub fn basis(&self) -> BasisId {
        self.basis
    }

    pub fn get(&self, index: &Index) -> f64 {
        self.entries.get(index).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Index, &f64)> {
        self.entries.iter()
    }

    pub fn scale(&mut self, alpha: f64) {
        for c in self.entries.values_mut() {
            *c *= alpha;
        }
        self.normalize();
    }

    /// `self + alpha * other`; both vectors must share a basis.
    pub fn axpy(&mut self, alpha: f64, other: &CoeffVector) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::Domain("coefficient vectors live in different bases".into()));
        }
        for (idx, c) in &other.entries {
            *self.entries.entry(*idx).or_insert(0.0) += alpha * c;
        }
        self.normalize();
        Ok(())
    }

    /// Coefficient of sine mode `k` (interval) or 0.
    pub fn mode(&self, k: u32) -> f64 {
        self.get(&Index::Mode(ModeIndex([k, 0])))
    }
}

/// How far a basis is truncated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    /// Multilevel bases: all levels `< max_level` (Haar) or `<= max_level`
    /// (hierarchical nodes).
    Levels(u32),
    /// Spectral bases: modes `1..=modes` per direction.
    Modes(u32),
}

/// An enumerated truncated basis with an evaluation rule.
#[derive(Clone, Debug)]
pub struct BasisDescriptor {
    pub id: BasisId,
    pub truncation: Truncation,
    indices: Vec<Index>,
}

/// Enumerates the truncated basis for `(domain, kind)`.
///
/// Haar with `Levels(J)` spans the piecewise constants on the dyadic cells of
/// side `2^-J`: one scaling function per unit cell plus wavelets on levels
/// `0..J`, so the interval count is `2^J` and the L-shape count is `3 * 4^J`.
pub fn build_basis(domain: Domain, kind: BasisKind, truncation: Truncation) -> Result<BasisDescriptor> {
    let indices: Vec<Index> = match (kind, truncation) {
        (BasisKind::Sine, Truncation::Modes(m)) => match domain {
            Domain::Interval => (1..=m).map(|k| Index::Mode(ModeIndex([k, 0]))).collect(),
            Domain::Square => (1..=m)
                .flat_map(|k| (1..=m).map(move |l| Index::Mode(ModeIndex([k, l]))))
                .collect(),
            Domain::LShape => {
                return Err(Error::Config("the sine basis is not defined on the L-shape".into()))
            }
        },
        (BasisKind::Haar, Truncation::Levels(j)) => {
            haar::enumerate(domain, j).into_iter().map(Index::Wavelet).collect()
        }
        (BasisKind::Hierarchical, Truncation::Levels(j)) => {
            if domain == Domain::Interval {
                return Err(Error::Config(
                    "the hierarchical basis is implemented for two-dimensional domains only".into(),
                ));
            }
            hierarchical::enumerate(domain, j).into_iter().map(Index::Wavelet).collect()
        }
        (k, t) => {
            return Err(Error::Config(format!(
                "truncation {t:?} does not apply to the {} basis",
                k.name()
            )))
        }
    };
    if let Truncation::Modes(0) = truncation {
        return Err(Error::Config("at least one mode is required".into()));
    }
    Ok(BasisDescriptor {
        id: BasisId::new(domain, kind),
        truncation,
        indices,
    })
}

impl BasisDescriptor {
    pub fn indices(&self) -> &[Index] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn levels(&self) -> Option<u32> {
        match self.truncation {
            Truncation::Levels(j) => Some(j),
            Truncation::Modes(_) => None,
        }
    }

    /// Point value of basis function `index`. Points outside the domain are
    /// rejected.
    pub fn eval(&self, index: &Index, point: &[f64]) -> Result<f64> {
        if point.len() != self.id.domain.dim() || !self.id.domain.contains(point) {
            return Err(Error::Domain(format!("point {point:?} is outside the {}", self.id.domain.name())));
        }
        Ok(match index {
            Index::Mode(ModeIndex([k, l])) => {
                let sx = std::f64::consts::SQRT_2 * (*k as f64 * std::f64::consts::PI * point[0]).sin();
                if self.id.domain.dim() == 1 {
                    sx
                } else {
                    sx * std::f64::consts::SQRT_2 * (*l as f64 * std::f64::consts::PI * point[1]).sin()
                }
            }
            Index::Wavelet(w) => match self.id.kind {
                BasisKind::Haar => haar::eval(self.id.domain.dim(), w, point),
                BasisKind::Hierarchical => hierarchical::eval(w, point),
                BasisKind::Sine => 0.0,
            },
        })
    }

    /// Provenance manifest in flat `key = value` form.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "domain = {}", self.id.domain.name());
        let _ = writeln!(out, "kind = {}", self.id.kind.name());
        match self.truncation {
            Truncation::Levels(j) => {
                let _ = writeln!(out, "levels = {j}");
            }
            Truncation::Modes(m) => {
                let _ = writeln!(out, "modes = {m}");
            }
        }
        let _ = writeln!(out, "index_count = {}", self.indices.len());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_haar_count() {
        let b = build_basis(Domain::Interval, BasisKind::Haar, Truncation::Levels(3)).unwrap();
        assert_eq!(b.len(), 8);
        let scaling = b
            .indices()
            .iter()
            .filter(|i| matches!(i, Index::Wavelet(w) if w.kind == 0))
            .count();
        assert_eq!(scaling, 1);
    }

    #[test]
    fn sine_enumeration() {
        let b = build_basis(Domain::Interval, BasisKind::Sine, Truncation::Modes(16)).unwrap();
        assert_eq!(b.len(), 16);
        let v = b.eval(&Index::Mode(ModeIndex([3, 0])), &[0.5]).unwrap();
        assert!((v + std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn lshape_haar_count_matches_cube_enumeration() {
        let sq = build_basis(Domain::Square, BasisKind::Haar, Truncation::Levels(2)).unwrap();
        let l = build_basis(Domain::LShape, BasisKind::Haar, Truncation::Levels(2)).unwrap();
        // independent count: dyadic cubes of side 1/4 inside the L-shape
        let cells = (-4..4)
            .flat_map(|a| (-4..4).map(move |b| [a, b]))
            .filter(|&[a, b]| {
                let c = [(a as f64 + 0.5) / 4.0, (b as f64 + 0.5) / 4.0];
                Domain::LShape.contains(&c)
            })
            .count();
        assert_eq!(l.len(), cells);
        assert_eq!(l.len(), 3 * sq.len());
    }

    #[test]
    fn unsupported_pairs_are_config_errors() {
        assert!(matches!(
            build_basis(Domain::LShape, BasisKind::Sine, Truncation::Modes(4)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            build_basis(Domain::Interval, BasisKind::Haar, Truncation::Modes(4)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn coeff_vector_rejects_foreign_indices_and_drops_zeros() {
        let id = BasisId::new(Domain::Interval, BasisKind::Haar);
        let bad = Index::Wavelet(WaveletIndex::new(2, [7, 0], 1));
        assert!(CoeffVector::from_entries(id, [(bad, 1.0)]).is_err());
        let good = Index::Wavelet(WaveletIndex::new(2, [3, 0], 1));
        let v = CoeffVector::from_entries(id, [(good, 1e-301), (Index::Wavelet(WaveletIndex::new(0, [0, 0], 0)), 2.0)])
            .unwrap();
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn manifest_lists_fields() {
        let b = build_basis(Domain::Square, BasisKind::Haar, Truncation::Levels(2)).unwrap();
        let m = b.manifest();
        assert!(m.contains("domain = square"));
        assert!(m.contains("index_count = 16"));
    }

    #[test]
    fn lshape_membership() {
        assert!(Domain::LShape.contains(&[-0.5, -0.5]));
        assert!(Domain::LShape.contains(&[0.5, 0.5]));
        assert!(!Domain::LShape.contains(&[0.5, -0.5]));
        assert!(Domain::LShape.contains(&[0.0, 0.0]));
        assert!(!Domain::LShape.contains(&[1.5, 0.0]));
    }
}
