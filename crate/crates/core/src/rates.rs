//! Log-log rate fits, dyadic ratio tests and verdicts against predicted
//! exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::widths::WidthCurve;

/// Default tolerance on fitted exponents.
pub const DEFAULT_MARGIN: f64 = 0.1;
/// Fits with a worse coefficient of determination are inconclusive.
pub const MIN_R_SQUARED: f64 = 0.95;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (usize, usize),
    pub points: usize,
}

/// Least squares line through `(ln n, ln value)`.
pub fn fit_points(points: &[(usize, f64)], window: (usize, usize)) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(Error::Range(format!(
            "a rate fit needs at least 4 samples in [{}, {}], found {}",
            window.0,
            window.1,
            points.len()
        )));
    }
    if let Some((n, v)) = points.iter().find(|(n, v)| !(*v > 0.0) || *n == 0) {
        return Err(Error::Domain(format!(
            "value {v} at n = {n} cannot enter a log-log fit (exact representation reached?)"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot <= 1e-30 * (1.0 + my * my) {
        if ss_res <= 1e-24 * (1.0 + my * my) {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        window,
        points: points.len(),
    })
}

/// Fit over the dyadic `n` (powers of two) of the curve inside `window`.
pub fn fit_rate(curve: &WidthCurve, window: (usize, usize)) -> Result<RateFit> {
    let pts: Vec<(usize, f64)> = curve
        .samples()
        .iter()
        .copied()
        .filter(|(n, _)| n.is_power_of_two() && *n >= window.0 && *n <= window.1)
        .collect();
    fit_points(&pts, window)
}

/// Fit over every sample inside `window`, for curves sampled at non-dyadic
/// `n` such as level-by-level truncations.
pub fn fit_rate_all(curve: &WidthCurve, window: (usize, usize)) -> Result<RateFit> {
    let pts: Vec<(usize, f64)> = curve
        .samples()
        .iter()
        .copied()
        .filter(|(n, _)| *n >= window.0 && *n <= window.1)
        .collect();
    fit_points(&pts, window)
}

/// Dyadic window without the smallest quarter of the available `n`.
pub fn default_window(curve: &WidthCurve) -> Option<(usize, usize)> {
    let ns: Vec<usize> = curve.samples().iter().map(|(n, _)| *n).filter(|n| n.is_power_of_two()).collect();
    if ns.is_empty() {
        return None;
    }
    let drop = ns.len() / 4;
    Some((ns[drop], *ns.last().unwrap()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicRatios {
    /// `(n, value(n) / value(2n))`.
    pub ratios: Vec<(usize, f64)>,
    /// `n` whose partner `2n` is missing.
    pub skipped: Vec<usize>,
}

pub fn dyadic_ratio_test(curve: &WidthCurve) -> DyadicRatios {
    let mut ratios = Vec::new();
    let mut skipped = Vec::new();
    for &(n, v) in curve.samples() {
        if n == 0 {
            continue;
        }
        match curve.value_at(2 * n) {
            Some(w) if w > 0.0 => ratios.push((n, v / w)),
            _ => skipped.push(n),
        }
    }
    DyadicRatios { ratios, skipped }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    /// Rate of the form `n^a` up to constants: the slope must match.
    TwoSided,
    /// Upper bound `<= C n^a`: the slope may be steeper.
    OneSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

pub fn judge(fit: &RateFit, predicted: f64, margin: f64, sided: Sidedness) -> Verdict {
    if fit.r_squared < MIN_R_SQUARED {
        return Verdict::Inconclusive;
    }
    let ok = match sided {
        Sidedness::TwoSided => (fit.slope - predicted).abs() <= margin,
        Sidedness::OneSided => fit.slope <= predicted + margin,
    };
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Parameters a predicted exponent may depend on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub t: f64,
    pub d: f64,
    pub s: f64,
    pub k: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateRule {
    /// Linear widths of regular problems: `n^{-t/d}`.
    Regular,
    /// Standard information: `n^{(s-t)/d}`.
    Sampling,
    /// Lipschitz domains: three branches in `t`.
    Lipschitz,
    /// Polygons, smoothness `k` of the data: `n^{-k/2}`.
    Polygon,
}

impl RateRule {
    pub fn id(self) -> &'static str {
        match self {
            RateRule::Regular => "regular",
            RateRule::Sampling => "sampling",
            RateRule::Lipschitz => "lipschitz",
            RateRule::Polygon => "polygon",
        }
    }

    pub fn sidedness(self) -> Sidedness {
        match self {
            RateRule::Regular | RateRule::Sampling => Sidedness::TwoSided,
            RateRule::Lipschitz | RateRule::Polygon => Sidedness::OneSided,
        }
    }

    pub fn exponent(self, p: RateParams) -> Result<f64> {
        if p.d < 1.0 {
            return Err(Error::Domain(format!("dimension {} must be at least 1", p.d)));
        }
        Ok(match self {
            RateRule::Regular => -p.t / p.d,
            RateRule::Sampling => (p.s - p.t) / p.d,
            RateRule::Lipschitz => lipschitz_branches(p.t, p.d)?.1,
            RateRule::Polygon => -p.k / 2.0,
        })
    }
}

/// Exponents of the three Lipschitz-domain branches at `(t, d)`.
pub fn lipschitz_exponents(t: f64, d: f64) -> [f64; 3] {
    [-t / d, -(t + 1.0) / (3.0 * d), -d / (2.0 * d * (d - 1.0))]
}

/// Branch points `t = 1/2` and `t = (d + 2) / (2 (d - 1))`.
pub fn lipschitz_breaks(d: f64) -> (f64, f64) {
    (0.5, (d + 2.0) / (2.0 * (d - 1.0)))
}

/// Active branch (0, 1 or 2) and its exponent; needs `d >= 2`.
pub fn lipschitz_branches(t: f64, d: f64) -> Result<(usize, f64)> {
    if d < 2.0 || !(t > 0.0) {
        return Err(Error::Domain(format!("the three-branch rule needs d >= 2 and t > 0, got d = {d}, t = {t}")));
    }
    let (b1, b2) = lipschitz_breaks(d);
    let e = lipschitz_exponents(t, d);
    let branch = if t <= b1 {
        0
    } else if t <= b2 {
        1
    } else {
        2
    };
    Ok((branch, e[branch]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityCheck {
    pub t: f64,
    pub left: f64,
    pub right: f64,
    /// Exact floating-point equality of the two adjacent branch exponents.
    pub exact: bool,
}

/// Evaluates adjacent branch exponents at both branch points.
pub fn lipschitz_continuity(d: f64) -> [ContinuityCheck; 2] {
    let (b1, b2) = lipschitz_breaks(d);
    let e1 = lipschitz_exponents(b1, d);
    let e2 = lipschitz_exponents(b2, d);
    [
        ContinuityCheck {
            t: b1,
            left: e1[0],
            right: e1[1],
            exact: e1[0] == e1[1],
        },
        ContinuityCheck {
            t: b2,
            left: e2[1],
            right: e2[2],
            exact: e2[1] == e2[2],
        },
    ]
}
