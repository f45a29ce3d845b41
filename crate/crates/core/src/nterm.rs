//! Best n-term approximation in a fixed Riesz basis, error curves, and
//! worst cases over the unit ball of the source space.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bases::{CoeffVector, Index, RieszBounds, SobolevWeight};
use crate::error::{Error, Result};
use crate::par;
use crate::problems::{operator_section, ModelProblem};
use crate::widths::{fmt17, CurveMeta, FiniteSection, WidthCurve, WidthKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NTermResult {
    pub kept: Vec<(Index, f64)>,
    pub n: usize,
    /// Weighted sequence norm of the discarded coefficients, or the
    /// measured `H`-norm error once supplied.
    pub error: f64,
    /// `[A tail, B tail]`: brackets the `H`-norm error.
    pub certified_band: (f64, f64),
}

impl NTermResult {
    /// Replaces the error by an independently measured `H`-norm error,
    /// which must lie in the certified band.
    pub fn with_measured_error(mut self, measured: f64) -> Result<Self> {
        let (lo, hi) = self.certified_band;
        let slack = 1e-9 * hi.max(1e-300);
        if measured < lo - slack || measured > hi + slack {
            return Err(Error::Invariant(format!(
                "measured n-term error {measured:e} outside the band [{lo:e}, {hi:e}]"
            )));
        }
        self.error = measured;
        Ok(self)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.n,
            fmt17(self.error),
            fmt17(self.certified_band.0),
            fmt17(self.certified_band.1)
        )
    }
}

pub const NTERM_CSV_HEADER: &str = "n,error,band_lower,band_upper";

pub fn nterm_csv(results: &[NTermResult]) -> String {
    let mut out = format!("{NTERM_CSV_HEADER}\n");
    for r in results {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Coefficients ordered by weighted magnitude, largest first; ties are
/// broken by index order.
fn ranked(u: &CoeffVector, norm: &SobolevWeight) -> Vec<(Index, f64, f64)> {
    let mut v: Vec<(Index, f64, f64)> = u.iter().map(|(i, c)| (*i, *c, (norm.weight(i) * c).abs())).collect();
    v.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    v
}

/// `tails[n]` = squared weighted norm of all but the `n` largest terms,
/// accumulated from the smallest term upward.
fn tails(ranked: &[(Index, f64, f64)]) -> Vec<f64> {
    let mut t = vec![0.0; ranked.len() + 1];
    for i in (0..ranked.len()).rev() {
        t[i] = t[i + 1] + ranked[i].2 * ranked[i].2;
    }
    t
}

pub fn best_n_term(u: &CoeffVector, n: usize, norm: &SobolevWeight, bounds: &RieszBounds) -> NTermResult {
    let r = ranked(u, norm);
    let t = tails(&r);
    let tail = t[n.min(r.len())].sqrt();
    NTermResult {
        kept: r.iter().take(n).map(|(i, c, _)| (*i, *c)).collect(),
        n,
        error: tail,
        certified_band: (bounds.lower * tail, bounds.upper * tail),
    }
}

/// Best n-term errors (weighted tails) at every `n` of `n_list`.
pub fn nterm_error_curve(
    u: &CoeffVector,
    n_list: &[usize],
    norm: &SobolevWeight,
    _bounds: &RieszBounds,
    meta: CurveMeta,
) -> Result<WidthCurve> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("n_list must be strictly increasing".into()));
    }
    let r = ranked(u, norm);
    let t = tails(&r);
    let samples = n_list.iter().map(|&n| (n, t[n.min(r.len())].sqrt())).collect();
    WidthCurve::new(WidthKind::Nterm, samples, meta)
}

/// Errors of keeping all coefficients up to a level: the value at
/// `n = #indices with level <= j` is the weighted tail beyond level `j`.
pub fn uniform_truncation_curve(u: &CoeffVector, levels: &[u32], norm: &SobolevWeight, meta: CurveMeta) -> Result<WidthCurve> {
    let mut per_level: std::collections::BTreeMap<u32, (usize, f64)> = Default::default();
    for (i, c) in u.iter() {
        let Index::Wavelet(w) = i else {
            return Err(Error::Domain("uniform truncation needs a multilevel basis".into()));
        };
        let e = per_level.entry(w.level).or_default();
        e.0 += 1;
        e.1 += (norm.weight(i) * c).powi(2);
    }
    let mut samples = Vec::new();
    for &j in levels {
        let n: usize = per_level.range(..=j).map(|(_, v)| v.0).sum();
        let tail: f64 = per_level.range(j + 1..).map(|(_, v)| v.1).sum();
        samples.push((n, tail.sqrt()));
    }
    WidthCurve::new(WidthKind::Uniform, samples, meta)
}

/// Approximation scheme whose worst case is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Keep the first `n` modes (a fixed linear method).
    LinearFirstN,
    /// Keep the `n` largest weighted coefficients.
    NTerm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    Analytic,
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub curve: WidthCurve,
    pub estimate: Estimate,
}

/// Analytic worst cases for a diagonal section with weighted gains `g`
/// (in mode order):
/// - first-n rule: `max_{k > n} g_k`;
/// - n-term: `sqrt(max_m (m - n) / W_m)`, `W_m = sum_{k <= m} g_(k)^{-2}` over
///   the gains sorted decreasingly. The extremal `f` spreads its energy so
///   that the `m` largest-gain outputs have equal size.
pub fn analytic_worst_case(gains: &[f64], n: usize, scheme: Scheme) -> f64 {
    match scheme {
        Scheme::LinearFirstN => gains.iter().skip(n).fold(0.0f64, |m, g| m.max(g.abs())),
        Scheme::NTerm => {
            let mut g: Vec<f64> = gains.iter().map(|x| x.abs()).collect();
            g.sort_by(|a, b| b.total_cmp(a));
            let mut w = 0.0;
            let mut best = 0.0f64;
            for (m, gm) in g.iter().enumerate() {
                w += gm.powi(-2);
                let m = m + 1;
                if m > n {
                    best = best.max((m - n) as f64 / w);
                }
            }
            best.sqrt()
        }
    }
}

/// Error of a scheme on the weighted output coordinates `y`.
fn scheme_error(y: &[f64], n: usize, scheme: Scheme) -> f64 {
    match scheme {
        Scheme::LinearFirstN => y.iter().skip(n).map(|v| v * v).sum::<f64>().sqrt(),
        Scheme::NTerm => {
            let mut sq: Vec<f64> = y.iter().map(|v| v * v).collect();
            sq.sort_by(|a, b| b.total_cmp(a));
            sq.iter().skip(n).rev().sum::<f64>().sqrt()
        }
    }
}

/// Largest error over `sample_count` seeded random unit vectors of the
/// source space, plus the top right singular vector of the section.
pub fn empirical_worst_case(section: &FiniteSection, n_list: &[usize], scheme: Scheme, sample_count: usize, seed: u64, meta: CurveMeta) -> Result<WorstCase> {
    if sample_count == 0 {
        return Err(Error::Domain("sample_count must be at least 1".into()));
    }
    let w = section.weighted_dense();
    let dim = section.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs: Vec<Vec<f64>> = (0..sample_count)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let svd = w.clone().svd(false, true);
    if let Some(vt) = svd.v_t {
        let top = (0..dim)
            .max_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
            .expect("nonempty");
        inputs.push(vt.row(top).iter().copied().collect());
    }
    let outputs: Vec<Vec<f64>> = par::map(&inputs, |x| (&w * nalgebra::DVector::from_column_slice(x)).iter().copied().collect());
    let samples = n_list
        .iter()
        .map(|&n| {
            let worst = outputs.iter().map(|y| scheme_error(y, n, scheme)).fold(0.0f64, f64::max);
            (n, worst)
        })
        .collect();
    Ok(WorstCase {
        curve: WidthCurve::new(kind_of(scheme), samples, meta)?,
        estimate: Estimate::Empirical,
    })
}

fn kind_of(scheme: Scheme) -> WidthKind {
    match scheme {
        Scheme::LinearFirstN => WidthKind::Linear,
        Scheme::NTerm => WidthKind::Nterm,
    }
}

/// Worst case over the unit ball of `H^{t-s}` of the scheme applied to the
/// solution, measured in `H^s`, on the first `truncation` eigenmodes.
/// Diagonal sections are handled analytically.
pub fn worst_case_over_ball(
    problem: &ModelProblem,
    t: f64,
    n_list: &[usize],
    scheme: Scheme,
    truncation: usize,
    sample_count: usize,
    seed: u64,
) -> Result<WorstCase> {
    let s = problem.order;
    let section = operator_section(problem, t - s, s, truncation)?;
    let meta = CurveMeta {
        problem: problem.id(),
        t,
        truncation,
    };
    match section.weighted_diagonal() {
        Some(g) => {
            let samples = n_list.iter().map(|&n| (n, analytic_worst_case(&g, n, scheme))).collect();
            Ok(WorstCase {
                curve: WidthCurve::new(kind_of(scheme), samples, meta)?,
                estimate: Estimate::Analytic,
            })
        }
        None => empirical_worst_case(&section, n_list, scheme, sample_count, seed, meta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{BasisId, BasisKind, Domain, WaveletIndex};
    use crate::problems::solve_diagonal;
    use crate::widths::SectionOrigin;
    use std::f64::consts::PI;

    fn meta() -> CurveMeta {
        CurveMeta {
            problem: "test".into(),
            t: 1.0,
            truncation: 0,
        }
    }

    fn haar_vec(values: &[(u32, i32, f64)]) -> CoeffVector {
        CoeffVector::from_entries(
            BasisId::new(Domain::Interval, BasisKind::Haar),
            values.iter().map(|&(j, k, c)| (Index::Wavelet(WaveletIndex::new(j, [k, 0], 1)), c)),
        )
        .unwrap()
    }

    #[test]
    fn keeps_largest_terms() {
        let u = haar_vec(&[(0, 0, 1.0), (1, 0, 3.0), (1, 1, 2.0)]);
        let r = best_n_term(&u, 2, &SobolevWeight::l2(), &RieszBounds::orthonormal());
        assert_eq!(r.error, 1.0);
        assert_eq!(r.kept.iter().map(|k| k.1).collect::<Vec<_>>(), vec![3.0, 2.0]);
        let r0 = best_n_term(&u, 0, &SobolevWeight::l2(), &RieszBounds::orthonormal());
        assert!((r0.error - 14f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ties_break_by_index() {
        let u = haar_vec(&[(1, 1, 1.0), (1, 0, -1.0), (0, 0, 1.0)]);
        let r = best_n_term(&u, 1, &SobolevWeight::l2(), &RieszBounds::orthonormal());
        assert_eq!(r.kept[0].0, Index::Wavelet(WaveletIndex::new(0, [0, 0], 1)));
    }

    #[test]
    fn band_and_measured_error() {
        let u = haar_vec(&[(0, 0, 1.0), (1, 0, 2.0)]);
        let b = RieszBounds::new(0.5, 2.0).unwrap();
        let r = best_n_term(&u, 1, &SobolevWeight::l2(), &b);
        assert_eq!(r.certified_band, (0.5, 2.0));
        assert!(r.certified_band.1 / r.certified_band.0 <= b.condition.powi(2));
        assert!(r.clone().with_measured_error(1.5).is_ok());
        assert!(matches!(r.with_measured_error(2.5), Err(Error::Invariant(_))));
    }

    #[test]
    fn greedy_matches_exhaustive_subsets() {
        let f: Vec<f64> = (1..=64).map(|k| (k as f64).powf(-1.5)).collect();
        let u = solve_diagonal(&ModelProblem::poisson(Domain::Interval), &CoeffVector::sine_series(&f)).unwrap();
        let w = SobolevWeight::new(1.0);
        let total: f64 = u.iter().map(|(i, c)| (w.weight(i) * c).powi(2)).sum();
        let ranked_vals: Vec<(usize, f64)> = (1..=8u32).map(|k| (k as usize, (w.weight(&Index::Mode(crate::bases::ModeIndex([k, 0]))) * u.mode(k)).powi(2))).collect();
        for n in 0..=4 {
            let greedy = best_n_term(&u, n, &w, &RieszBounds::orthonormal()).error;
            // all subsets of size n from the 8 largest modes
            let mut best = f64::INFINITY;
            for mask in 0u32..256 {
                if mask.count_ones() as usize != n {
                    continue;
                }
                let kept: f64 = ranked_vals.iter().filter(|(k, _)| mask >> (k - 1) & 1 == 1).map(|(_, v)| v).sum();
                best = best.min((total - kept).max(0.0).sqrt());
            }
            assert!((greedy - best).abs() < 1e-12 * best.max(1e-300), "n={n}");
        }
    }

    #[test]
    fn curve_shapes() {
        let single = haar_vec(&[(2, 1, 0.5)]);
        let c = nterm_error_curve(&single, &[0, 1, 2], &SobolevWeight::l2(), &RieszBounds::orthonormal(), meta()).unwrap();
        assert_eq!(c.samples(), &[(0, 0.5), (1, 0.0), (2, 0.0)]);
        let geo: Vec<(u32, i32, f64)> = (0..20).map(|j| (j, 0, 2f64.powi(-(j as i32)))).collect();
        let c = nterm_error_curve(&haar_vec(&geo), &[1, 2, 3, 4], &SobolevWeight::l2(), &RieszBounds::orthonormal(), meta()).unwrap();
        for (n, v) in c.samples() {
            // geometric tail sum_{j >= n} 4^{-j}
            let exact = (4f64.powi(-(*n as i32)) * 4.0 / 3.0 * (1.0 - 4f64.powi(-(20 - *n as i32)))).sqrt();
            assert!((v - exact).abs() < 1e-15);
        }
        assert!(nterm_error_curve(&single, &[2, 1], &SobolevWeight::l2(), &RieszBounds::orthonormal(), meta()).is_err());
    }

    #[test]
    fn poisson_worst_cases() {
        let p = ModelProblem::poisson(Domain::Interval);
        let lin = worst_case_over_ball(&p, 1.0, &[0, 1, 5], Scheme::LinearFirstN, 256, 1, 0).unwrap();
        assert_eq!(lin.estimate, Estimate::Analytic);
        assert!((lin.curve.value_at(0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((lin.curve.value_at(5).unwrap() - 1.0 / (6.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn nterm_formula_is_attained_and_dominates_samples() {
        let gains = [1.0, 0.7, 0.5, 0.45, 0.2];
        for n in 0..4 {
            let v = analytic_worst_case(&gains, n, Scheme::NTerm);
            // the water-filling input attains it
            let mut best = 0.0f64;
            for m in n + 1..=gains.len() {
                let wsum: f64 = gains[..m].iter().map(|g| g.powi(-2)).sum();
                let c = (1.0 / wsum).sqrt();
                let y: Vec<f64> = (0..gains.len()).map(|k| if k < m { c } else { 0.0 }).collect();
                best = best.max(scheme_error(&y, n, Scheme::NTerm));
            }
            assert!((best - v).abs() < 1e-14);
            let section = FiniteSection::diagonal(gains.to_vec(), vec![1.0; 5], vec![1.0; 5], SectionOrigin::Exact).unwrap();
            let emp = empirical_worst_case(&section, &[n], Scheme::NTerm, 2000, 3, meta()).unwrap();
            let e = emp.curve.value_at(n).unwrap();
            assert!(e <= v * (1.0 + 1e-12) && e > 0.9 * v, "n={n}: {e} vs {v}");
        }
    }

    #[test]
    fn nonlinear_beats_first_n_per_input() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let y: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
            for n in 0..12 {
                assert!(scheme_error(&y, n, Scheme::NTerm) <= scheme_error(&y, n, Scheme::LinearFirstN) + 1e-15);
            }
        }
    }

    #[test]
    fn empirical_never_exceeds_analytic() {
        let p = ModelProblem::poisson(Domain::Interval);
        let section = operator_section(&p, 0.0, 1.0, 64).unwrap();
        let dense = FiniteSection::dense(section.weighted_dense(), vec![1.0; 64], vec![1.0; 64], SectionOrigin::Truncated).unwrap();
        let ns = [0, 1, 2, 4, 8];
        for scheme in [Scheme::LinearFirstN, Scheme::NTerm] {
            let emp = empirical_worst_case(&dense, &ns, scheme, 100, 11, meta()).unwrap();
            let ana = worst_case_over_ball(&p, 1.0, &ns, scheme, 64, 1, 0).unwrap();
            for ((_, e), (_, a)) in emp.curve.samples().iter().zip(ana.curve.samples()) {
                assert!(e <= &(a * (1.0 + 1e-12)));
            }
        }
    }
}
