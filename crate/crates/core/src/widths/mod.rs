//! Linear widths (approximation numbers), Bernstein widths and the
//! nonlinear-width lower bound on finite sections of solution operators.

mod extremal;
pub mod jacobi;
pub mod sampling;

use std::fmt::Write as _;

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use extremal::{active_count, equioscillation_point, sweep_max_active, EQUIOSCILLATION_TOL, lemma3_certificate, Lemma3Report, MAX_AMBIENT, MAX_SUBSPACE};

/// Relative tolerance of the SVD-based identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Singular values below this fraction of the largest count as zero.
pub const DEGENERACY_TOL: f64 = 1e-13;
/// Largest dense section the Rayleigh cross-check runs on.
const RAYLEIGH_CHECK_MAX: usize = 128;

#[derive(Clone, Debug, PartialEq)]
pub enum SectionMatrix {
    Dense(DMatrix<f64>),
    Diagonal(Vec<f64>),
}

/// Whether a section is the whole operator or a truncation of a larger one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectionOrigin {
    Exact,
    Truncated,
}

/// Matrix of an operator between two weighted coordinate spaces. The
/// source weights define the norm of the unit ball, the target weights the
/// norm errors are measured in.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSection {
    pub matrix: SectionMatrix,
    pub source_weights: Vec<f64>,
    pub target_weights: Vec<f64>,
    pub origin: SectionOrigin,
}

fn check_weights(w: &[f64], n: usize, what: &str) -> Result<()> {
    if w.len() != n {
        return Err(Error::Domain(format!("{what} weights have length {} but the section has size {n}", w.len())));
    }
    if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::Domain(format!("{what} weight {bad} is not strictly positive")));
    }
    Ok(())
}

impl FiniteSection {
    pub fn dense(
        matrix: DMatrix<f64>,
        source_weights: Vec<f64>,
        target_weights: Vec<f64>,
        origin: SectionOrigin,
    ) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::Domain(format!("section matrix must be square and nonempty, got {}x{}", n, matrix.ncols())));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("section matrix has non-finite entries".into()));
        }
        check_weights(&source_weights, n, "source")?;
        check_weights(&target_weights, n, "target")?;
        Ok(FiniteSection {
            matrix: SectionMatrix::Dense(matrix),
            source_weights,
            target_weights,
            origin,
        })
    }

    pub fn diagonal(
        entries: Vec<f64>,
        source_weights: Vec<f64>,
        target_weights: Vec<f64>,
        origin: SectionOrigin,
    ) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("diagonal section must be nonempty and finite".into()));
        }
        check_weights(&source_weights, n, "source")?;
        check_weights(&target_weights, n, "target")?;
        Ok(FiniteSection {
            matrix: SectionMatrix::Diagonal(entries),
            source_weights,
            target_weights,
            origin,
        })
    }

    /// Unweighted section: the matrix acts between plain l2 spaces.
    pub fn unweighted(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        Self::dense(matrix, vec![1.0; n], vec![1.0; n], SectionOrigin::Exact)
    }

    pub fn size(&self) -> usize {
        self.source_weights.len()
    }

    /// Entries of the weighted diagonal `w_target * m / w_source`, for
    /// diagonal sections.
    pub fn weighted_diagonal(&self) -> Option<Vec<f64>> {
        match &self.matrix {
            SectionMatrix::Diagonal(d) => Some(
                d.iter()
                    .zip(&self.source_weights)
                    .zip(&self.target_weights)
                    .map(|((m, s), t)| t * m / s)
                    .collect(),
            ),
            SectionMatrix::Dense(_) => None,
        }
    }

    /// `D_target * M * D_source^{-1}` as a dense matrix.
    pub fn weighted_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        match &self.matrix {
            SectionMatrix::Dense(m) => DMatrix::from_fn(n, n, |i, j| {
                self.target_weights[i] * m[(i, j)] / self.source_weights[j]
            }),
            SectionMatrix::Diagonal(_) => {
                let d = self.weighted_diagonal().expect("diagonal");
                DMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 })
            }
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let matrix = match &self.matrix {
            SectionMatrix::Dense(m) => SectionMatrix::Dense(m * alpha),
            SectionMatrix::Diagonal(d) => SectionMatrix::Diagonal(d.iter().map(|x| x * alpha).collect()),
        };
        FiniteSection {
            matrix,
            ..self.clone()
        }
    }

    /// Diagonal sections whose weighted entries do not increase along the
    /// mode order: their leading singular values coincide with those of
    /// the untruncated operator.
    fn is_monotone_diagonal(&self) -> bool {
        self.weighted_diagonal()
            .map(|d| d.windows(2).all(|w| w[1].abs() <= w[0].abs()))
            .unwrap_or(false)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthKind {
    /// Approximation numbers `e_n^lin`.
    Linear,
    /// Approximation numbers indexed by the dimension they leave out:
    /// the value at `m` is `sigma_m`.
    LinearDim,
    /// Bernstein widths `b_n`: radius of the largest `(n+1)`-ball.
    Bernstein,
    /// Dimension-indexed Bernstein widths: radius of the largest `n`-ball.
    BernsteinDim,
    /// Best n-term errors.
    Nterm,
    /// Errors of algorithms using `n` function values.
    Sampling,
    /// Level-by-level (uniform) truncation errors.
    Uniform,
}

impl WidthKind {
    pub fn name(self) -> &'static str {
        match self {
            WidthKind::Linear => "linear",
            WidthKind::LinearDim => "linear_dim",
            WidthKind::Bernstein => "bernstein",
            WidthKind::BernsteinDim => "bernstein_dim",
            WidthKind::Nterm => "nterm",
            WidthKind::Sampling => "sampling",
            WidthKind::Uniform => "uniform",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub problem: String,
    pub t: f64,
    pub truncation: usize,
}

/// Samples `(n, value)` of a width or error curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthCurve {
    pub kind: WidthKind,
    samples: Vec<(usize, f64)>,
    pub meta: CurveMeta,
}

impl WidthCurve {
    /// Validates strictly increasing `n`, finite nonnegative values and
    /// monotone decay (up to a relative rounding slack).
    pub fn new(kind: WidthKind, samples: Vec<(usize, f64)>, meta: CurveMeta) -> Result<Self> {
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Invariant(format!("curve n values not increasing at {}", w[1].0)));
            }
            if w[1].1 > w[0].1 * (1.0 + 1e-9) + 1e-300 {
                return Err(Error::Invariant(format!(
                    "{} curve increases between n = {} ({:e}) and n = {} ({:e})",
                    kind.name(),
                    w[0].0,
                    w[0].1,
                    w[1].0,
                    w[1].1
                )));
            }
        }
        if let Some((n, v)) = samples.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Invariant(format!("curve value {v} at n = {n} is not finite and nonnegative")));
        }
        Ok(WidthCurve { kind, samples, meta })
    }

    pub fn samples(&self) -> &[(usize, f64)] {
        &self.samples
    }

    pub fn value_at(&self, n: usize) -> Option<f64> {
        self.samples
            .binary_search_by_key(&n, |(m, _)| *m)
            .ok()
            .map(|i| self.samples[i].1)
    }

    pub fn max_n(&self) -> Option<usize> {
        self.samples.last().map(|(n, _)| *n)
    }

    /// Keeps the samples whose `n` is in `ns`.
    pub fn restrict(&self, ns: &[usize]) -> Self {
        WidthCurve {
            kind: self.kind,
            samples: self.samples.iter().copied().filter(|(n, _)| ns.contains(n)).collect(),
            meta: self.meta.clone(),
        }
    }

    /// Shifts `n` to `n + 1`: Bernstein widths by ball dimension
    /// (`b~_{n+1} = b_n`) and approximation numbers by singular value index.
    pub fn to_dimension_indexed(&self) -> Result<Self> {
        let kind = match self.kind {
            WidthKind::Bernstein => WidthKind::BernsteinDim,
            WidthKind::Linear => WidthKind::LinearDim,
            other => {
                return Err(Error::Domain(format!("{} curves cannot be re-indexed by dimension", other.name())));
            }
        };
        Ok(WidthCurve {
            kind,
            samples: self.samples.iter().map(|(n, v)| (n + 1, *v)).collect(),
            meta: self.meta.clone(),
        })
    }

    /// CSV body rows `experiment,kind,n,value,problem,t,N` with 17
    /// significant digits.
    pub fn csv_rows(&self, experiment: &str) -> String {
        let mut out = String::new();
        for (n, v) in &self.samples {
            let _ = writeln!(
                out,
                "{experiment},{},{n},{},{},{},{}",
                self.kind.name(),
                fmt17(*v),
                self.meta.problem,
                fmt17(self.meta.t),
                self.meta.truncation
            );
        }
        out
    }
}

/// Dot-decimal scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub const CSV_HEADER: &str = "experiment,kind,n,value,problem,t,N";

fn singular_values_sorted(section: &FiniteSection) -> Vec<f64> {
    if let Some(mut d) = section.weighted_diagonal() {
        for x in d.iter_mut() {
            *x = x.abs();
        }
        d.sort_by(|a, b| b.total_cmp(a));
        return d;
    }
    let svd = SVD::new(section.weighted_dense(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn check_range(section: &FiniteSection, n_max: usize) -> Result<()> {
    if n_max >= section.size() {
        return Err(Error::Range(format!(
            "n_max = {n_max} needs a section larger than N = {}",
            section.size()
        )));
    }
    Ok(())
}

/// Truncation certificate for sections cut out of a larger operator:
/// `sigma_N <= sigma_{n_max+1} / 10`. Monotone diagonal sections pass
/// without a margin since their leading values are exact.
pub fn truncation_certificate(section: &FiniteSection, values: &[f64], n_max: usize) -> Result<TruncationCertificate> {
    let last = *values.last().expect("nonempty");
    let reference = values[n_max];
    let exact = section.origin == SectionOrigin::Exact || section.is_monotone_diagonal();
    let ratio = if reference > 0.0 { last / reference } else { f64::INFINITY };
    if !exact && ratio > 0.1 {
        return Err(Error::Truncation(format!(
            "sigma_N / sigma_(n_max+1) = {ratio:.3} exceeds 1/10 for N = {}, n_max = {n_max}",
            section.size()
        )));
    }
    Ok(TruncationCertificate {
        truncation: section.size(),
        n_max,
        tail_ratio: ratio,
        exact,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationCertificate {
    pub truncation: usize,
    pub n_max: usize,
    /// `sigma_N / sigma_{n_max+1}`.
    pub tail_ratio: f64,
    /// Section values at `n <= n_max` coincide with the full operator's.
    pub exact: bool,
}

/// Approximation numbers: the value at `n` is the `(n+1)`-st singular value
/// of the weighted matrix.
pub fn approximation_numbers(section: &FiniteSection, n_max: usize, meta: CurveMeta) -> Result<WidthCurve> {
    check_range(section, n_max)?;
    let s = singular_values_sorted(section);
    truncation_certificate(section, &s, n_max)?;
    WidthCurve::new(
        WidthKind::Linear,
        (0..=n_max).map(|n| (n, s[n])).collect(),
        meta,
    )
}

/// Bernstein widths `b_n`, computed by one-sided Jacobi on the weighted
/// matrix and cross-checked with the Rayleigh quotient over the span of the
/// leading `n+1` right singular vectors.
pub fn bernstein_widths(section: &FiniteSection, n_max: usize, meta: CurveMeta) -> Result<WidthCurve> {
    check_range(section, n_max)?;
    let values = if let Some(d) = section.weighted_diagonal() {
        // coordinate subspaces are optimal: take the n+1 largest gains
        let mut g: Vec<f64> = d.iter().map(|x| x.abs()).collect();
        g.sort_by(|a, b| b.total_cmp(a));
        g
    } else {
        let w = section.weighted_dense();
        let (s, v) = jacobi::svd(&w);
        if section.size() <= RAYLEIGH_CHECK_MAX {
            rayleigh_check(&w, &v, &s, n_max)?;
        }
        s
    };
    let top = values[0];
    if top == 0.0 || *values.last().unwrap() < DEGENERACY_TOL * top {
        return Err(Error::Degenerate(format!(
            "smallest singular value {:e} is below {DEGENERACY_TOL:e} * sigma_max",
            values.last().unwrap()
        )));
    }
    truncation_certificate(section, &values, n_max)?;
    WidthCurve::new(
        WidthKind::Bernstein,
        (0..=n_max).map(|n| (n, values[n])).collect(),
        meta,
    )
}

fn rayleigh_check(w: &DMatrix<f64>, v: &DMatrix<f64>, s: &[f64], n_max: usize) -> Result<()> {
    let wv = w * v;
    let gram = wv.transpose() * &wv;
    for n in 0..=n_max {
        let block = gram.view((0, 0), (n + 1, n + 1)).into_owned();
        let min_gain = jacobi::symmetric_eigenvalues(&block)[0].max(0.0).sqrt();
        let rel = (min_gain - s[n]).abs() / s[0];
        if rel > 1e-8 {
            return Err(Error::Numerical {
                message: format!("Rayleigh quotient on the optimal {}-dimensional subspace disagrees with sigma", n + 1),
                residual: rel,
            });
        }
    }
    Ok(())
}

/// Smallest gain `min ||W x|| / ||x||` over the column span of `basis`,
/// the quantity maximized in the Bernstein width.
pub fn min_gain_on_subspace(section: &FiniteSection, basis: &DMatrix<f64>) -> f64 {
    let q = basis.clone().qr().q();
    let wq = section.weighted_dense() * q;
    let gram = wq.transpose() * &wq;
    jacobi::symmetric_eigenvalues(&gram)[0].max(0.0).sqrt()
}

/// Certified lower bound `b_m / (2C)`, `m = ceil(4 C^2 n)`, for the
/// nonlinear width of order `n` over bases with condition at most `C`.
pub fn nonlinear_width_lower_bound(bernstein: &WidthCurve, condition: f64, n: usize) -> Result<f64> {
    if bernstein.kind != WidthKind::Bernstein {
        return Err(Error::Domain("lower bound needs a Bernstein curve".into()));
    }
    if !(condition >= 1.0) {
        return Err(Error::Domain(format!("condition {condition} must be at least 1")));
    }
    let m = required_index(condition, n);
    let b = bernstein.value_at(m).ok_or_else(|| {
        Error::Range(format!(
            "Bernstein curve ends at n = {:?} but m = ceil(4 C^2 n) = {m}",
            bernstein.max_n()
        ))
    })?;
    Ok(b / (2.0 * condition))
}

/// `ceil(4 C^2 n)`, robust to rounding right at an integer.
pub fn required_index(condition: f64, n: usize) -> usize {
    let x = 4.0 * condition * condition * n as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn meta() -> CurveMeta {
        CurveMeta {
            problem: "test".into(),
            t: 1.0,
            truncation: 0,
        }
    }

    fn poisson_section(n: usize, t: f64) -> FiniteSection {
        let eig: Vec<f64> = (1..=n).map(|k| (k as f64 * PI).powi(2)).collect();
        FiniteSection::diagonal(
            eig.iter().map(|e| 1.0 / e).collect(),
            (1..=n).map(|k| (k as f64 * PI).powf(t - 1.0)).collect(),
            (1..=n).map(|k| k as f64 * PI).collect(),
            SectionOrigin::Truncated,
        )
        .unwrap()
    }

    #[test]
    #[allow(clippy::approx_constant)] // frozen oracle values
    fn poisson_linear_widths() {
        let c = approximation_numbers(&poisson_section(64, 1.0), 9, meta()).unwrap();
        assert!((c.value_at(0).unwrap() - 0.318310).abs() < 1e-6);
        assert!((c.value_at(9).unwrap() - 0.0318310).abs() < 1e-7);
        let c2 = approximation_numbers(&poisson_section(64, 2.0), 3, meta()).unwrap();
        assert!((c2.value_at(3).unwrap() - (4.0 * PI).powi(-2)).abs() < 1e-15);
        assert!((c2.value_at(3).unwrap() - 0.0063326).abs() < 1e-7);
    }

    #[test]
    fn identity_widths_are_one() {
        let s = FiniteSection::unweighted(DMatrix::identity(5, 5)).unwrap();
        let c = approximation_numbers(&s, 4, meta()).unwrap();
        assert!(c.samples().iter().all(|(_, v)| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn ellipsoid_bernstein_radii() {
        let s = FiniteSection::diagonal(vec![1.0, 0.5, 0.25], vec![1.0; 3], vec![1.0; 3], SectionOrigin::Exact).unwrap();
        let b = bernstein_widths(&s, 2, meta()).unwrap();
        assert_eq!(b.samples(), &[(0, 1.0), (1, 0.5), (2, 0.25)]);
        // dense route agrees
        let dense = FiniteSection::unweighted(s.weighted_dense()).unwrap();
        let bd = bernstein_widths(&dense, 2, meta()).unwrap();
        for ((_, a), (_, b)) in b.samples().iter().zip(bd.samples()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn bernstein_equals_linear_on_random_sections() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let m = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
        let s = FiniteSection::dense(
            m,
            (0..6).map(|_| rng.random_range(0.5..2.0)).collect(),
            (0..6).map(|_| rng.random_range(0.5..2.0)).collect(),
            SectionOrigin::Exact,
        )
        .unwrap();
        let lin = approximation_numbers(&s, 4, meta()).unwrap();
        let bern = bernstein_widths(&s, 4, meta()).unwrap();
        for ((_, a), (_, b)) in lin.samples().iter().zip(bern.samples()) {
            assert!((a - b).abs() <= 1e-10 * a);
        }
    }

    #[test]
    fn optimal_subspace_beats_random_subspaces() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let s = FiniteSection::unweighted(DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let b = bernstein_widths(&s, 3, meta()).unwrap();
        for _ in 0..200 {
            let sub = DMatrix::from_fn(6, 3, |_, _| rng.random_range(-1.0..1.0));
            assert!(min_gain_on_subspace(&s, &sub) <= b.value_at(2).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn singular_sections_are_degenerate() {
        let mut m = DMatrix::identity(3, 3);
        m[(2, 2)] = 0.0;
        let s = FiniteSection::unweighted(m).unwrap();
        assert!(matches!(bernstein_widths(&s, 1, meta()), Err(Error::Degenerate(_))));
    }

    #[test]
    fn truncation_dominance_is_enforced() {
        // slowly decaying dense section flagged as a truncation
        let n = 8;
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / (1.0 + i as f64) } else { 0.01 });
        let s = FiniteSection::dense(m, vec![1.0; n], vec![1.0; n], SectionOrigin::Truncated).unwrap();
        assert!(matches!(approximation_numbers(&s, 4, meta()), Err(Error::Truncation(_))));
        let n = 40;
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { (1.0 + i as f64).powi(-2) } else { 1e-5 });
        let s = FiniteSection::dense(m, vec![1.0; n], vec![1.0; n], SectionOrigin::Truncated).unwrap();
        assert!(approximation_numbers(&s, 4, meta()).is_ok());
    }

    #[test]
    fn lower_bound_formula() {
        let curve = WidthCurve::new(
            WidthKind::Bernstein,
            (0..=20).map(|n| (n, 0.8 / (n.max(1) as f64))).collect(),
            meta(),
        )
        .unwrap();
        assert_eq!(curve.value_at(4), Some(0.2));
        assert!((nonlinear_width_lower_bound(&curve, 1.0, 1).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(required_index(2.0, 1), 16);
        let b16 = curve.value_at(16).unwrap();
        assert!((nonlinear_width_lower_bound(&curve, 2.0, 1).unwrap() - b16 / 4.0).abs() < 1e-15);
        assert!(matches!(nonlinear_width_lower_bound(&curve, 2.0, 2), Err(Error::Range(_))));
        assert!(matches!(nonlinear_width_lower_bound(&curve, 0.5, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn poisson_lower_bound_value() {
        let b = bernstein_widths(&poisson_section(64, 1.0), 20, meta()).unwrap();
        let lb = nonlinear_width_lower_bound(&b, 1.0, 4).unwrap();
        assert!((lb - 1.0 / (17.0 * PI) / 2.0).abs() < 1e-15);
        assert!((lb - 0.009363).abs() < 1e-6);
    }

    #[test]
    fn scaling_equivariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let s = FiniteSection::unweighted(DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let a = approximation_numbers(&s, 3, meta()).unwrap();
        let b = approximation_numbers(&s.scaled(3.5), 3, meta()).unwrap();
        for ((_, x), (_, y)) in a.samples().iter().zip(b.samples()) {
            assert!((3.5 * x - y).abs() < 1e-13);
        }
    }
}
