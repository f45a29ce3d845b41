//! Model elliptic problems: Poisson (and fractional powers of the
//! Laplacian) on the interval and the square, diagonal in the sine basis,
//! and Poisson on the L-shape.

pub mod dump;
pub mod lshape;
pub mod quadrature;
pub mod singular;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::bases::hierarchical::NodalGrid;
use crate::bases::{sequence_norm, BasisId, BasisKind, CoeffVector, Domain, Index, ModeIndex, SobolevWeight};
use crate::error::{Error, Result};
use crate::widths::{FiniteSection, SectionOrigin};

pub use lshape::{galerkin_solve, lshape_solution, GalerkinSolution, ManufacturedSolution};
pub use singular::{Cutoff, SingularFunction, REENTRANT};

/// Largest L-shape level whose discrete eigenbasis is computed densely.
pub const MAX_EIGEN_LEVEL: u32 = 5;
/// Largest mode index generated for diagonal sections on the square.
const MAX_SQUARE_MODE: u32 = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EigenRule {
    /// `(pi^2 |k|^2)^s`: the Dirichlet Laplacian raised to the order `s`.
    Laplacian,
    /// Every mode has the same eigenvalue.
    Constant(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProblemKind {
    Diagonal(EigenRule),
    /// Dirichlet Laplacian on the L-shape, discretized on the reference mesh.
    LShape { reference_level: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelProblem {
    pub domain: Domain,
    /// Operator order: the solution operator maps `H^{-s}` onto `H^s_0`.
    pub order: f64,
    pub kind: ProblemKind,
}

impl ModelProblem {
    pub fn poisson(domain: Domain) -> Self {
        match domain {
            Domain::LShape => ModelProblem {
                domain,
                order: 1.0,
                kind: ProblemKind::LShape {
                    reference_level: MAX_EIGEN_LEVEL,
                },
            },
            _ => ModelProblem {
                domain,
                order: 1.0,
                kind: ProblemKind::Diagonal(EigenRule::Laplacian),
            },
        }
    }

    /// `(-Delta)^order` on the interval or the square.
    pub fn fractional(domain: Domain, order: f64) -> Result<Self> {
        if !(order > 0.0) || domain == Domain::LShape {
            return Err(Error::Config(format!(
                "fractional problems need order > 0 on the interval or square, got {order} on {}",
                domain.name()
            )));
        }
        Ok(ModelProblem {
            domain,
            order,
            kind: ProblemKind::Diagonal(EigenRule::Laplacian),
        })
    }

    /// Identity-like operator: all eigenvalues equal to one.
    pub fn identity(domain: Domain) -> Self {
        ModelProblem {
            domain,
            order: 1.0,
            kind: ProblemKind::Diagonal(EigenRule::Constant(1.0)),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.kind, ProblemKind::Diagonal(_))
    }

    pub fn id(&self) -> String {
        match self.kind {
            ProblemKind::Diagonal(EigenRule::Laplacian) if self.order == 1.0 => format!("poisson-{}", self.domain.name()),
            ProblemKind::Diagonal(EigenRule::Laplacian) => format!("laplacian^{}-{}", self.order, self.domain.name()),
            ProblemKind::Diagonal(EigenRule::Constant(c)) => format!("constant{}-{}", c, self.domain.name()),
            ProblemKind::LShape { .. } => "poisson-lshape".to_string(),
        }
    }

    /// Eigenvalue of a sine mode for diagonal problems.
    pub fn eigenvalue(&self, mode: ModeIndex) -> Result<f64> {
        match self.kind {
            ProblemKind::Diagonal(EigenRule::Laplacian) => {
                Ok((PI * PI * mode.frequency().powi(2)).powf(self.order))
            }
            ProblemKind::Diagonal(EigenRule::Constant(c)) => Ok(c),
            ProblemKind::LShape { .. } => Err(Error::Config("the L-shape problem has no closed-form eigenvalues".into())),
        }
    }

    /// The first `n` sine modes in order of increasing frequency, ties
    /// broken lexicographically.
    pub fn modes(&self, n: usize) -> Result<Vec<ModeIndex>> {
        match self.domain {
            Domain::Interval => Ok((1..=n as u32).map(|k| ModeIndex([k, 0])).collect()),
            Domain::Square => {
                let mut side = 1u32;
                while ((side as usize) * (side as usize)) < 4 * n && side < MAX_SQUARE_MODE {
                    side *= 2;
                }
                let mut modes: Vec<ModeIndex> = (1..=side)
                    .flat_map(|k| (1..=side).map(move |l| ModeIndex([k, l])))
                    .collect();
                modes.sort_by_key(|m| (m.0[0] * m.0[0] + m.0[1] * m.0[1], m.0));
                // every mode with k^2 + l^2 <= side^2 is present
                let complete = modes.iter().take_while(|m| m.0[0].pow(2) + m.0[1].pow(2) <= side * side).count();
                if complete < n {
                    return Err(Error::Config(format!("square sections are limited to {complete} modes")));
                }
                modes.truncate(n);
                Ok(modes)
            }
            Domain::LShape => Err(Error::Config("the L-shape has no sine modes".into())),
        }
    }
}

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Right-hand side given by coefficients, a point evaluator, or both.
/// `smoothness` is the index of the Sobolev space it is normalized in.
#[derive(Clone)]
pub struct RightHandSide {
    pub domain: Domain,
    coeffs: Option<CoeffVector>,
    evaluator: Option<Evaluator>,
    pub smoothness: f64,
    zero: bool,
}

impl fmt::Debug for RightHandSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RightHandSide")
            .field("domain", &self.domain)
            .field("coeffs", &self.coeffs)
            .field("evaluator", &self.evaluator.is_some())
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl RightHandSide {
    pub fn zero(domain: Domain) -> Self {
        RightHandSide {
            domain,
            coeffs: None,
            evaluator: Some(Arc::new(|_: &[f64]| 0.0)),
            smoothness: f64::INFINITY,
            zero: true,
        }
    }

    pub fn from_coeffs(coeffs: CoeffVector, smoothness: f64) -> Self {
        RightHandSide {
            domain: coeffs.basis().domain,
            zero: coeffs.is_empty(),
            coeffs: Some(coeffs),
            evaluator: None,
            smoothness,
        }
    }

    pub fn from_fn(domain: Domain, f: Evaluator, smoothness: f64) -> Self {
        RightHandSide {
            domain,
            coeffs: None,
            evaluator: Some(f),
            smoothness,
            zero: false,
        }
    }

    /// Finite sine series in the orthonormal basis `sqrt(2) sin(k pi x)` (or
    /// its tensor product on the square), with both representations.
    pub fn sine_series(coeffs: CoeffVector, smoothness: f64) -> Result<Self> {
        let basis = coeffs.basis();
        if basis.kind != BasisKind::Sine {
            return Err(Error::Domain("sine_series needs sine coefficients".into()));
        }
        let terms: Vec<([u32; 2], f64)> = coeffs
            .iter()
            .filter_map(|(i, c)| match i {
                Index::Mode(m) => Some((m.0, *c)),
                Index::Wavelet(_) => None,
            })
            .collect();
        let dim = basis.domain.dim();
        let eval: Evaluator = Arc::new(move |p: &[f64]| {
            terms
                .iter()
                .map(|([k, l], c)| {
                    let x = 2f64.sqrt() * (*k as f64 * PI * p[0]).sin();
                    let y = if dim == 2 { 2f64.sqrt() * (*l as f64 * PI * p[1]).sin() } else { 1.0 };
                    c * x * y
                })
                .sum()
        });
        Ok(RightHandSide {
            domain: basis.domain,
            zero: coeffs.is_empty(),
            coeffs: Some(coeffs),
            evaluator: Some(eval),
            smoothness,
        })
    }

    pub fn coeffs(&self) -> Option<&CoeffVector> {
        self.coeffs.as_ref()
    }

    pub fn evaluator(&self) -> Option<&Evaluator> {
        self.evaluator.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Norm of the coefficient representation in the declared space.
    pub fn norm(&self) -> Result<f64> {
        let c = self
            .coeffs
            .as_ref()
            .ok_or_else(|| Error::Capability("norm needs the coefficient representation".into()))?;
        Ok(sequence_norm(c, &SobolevWeight::new(self.smoothness)))
    }

    /// Rescales the coefficients to unit norm in the declared space.
    pub fn normalized(self) -> Result<Self> {
        let n = self.norm()?;
        if n == 0.0 {
            return Err(Error::Domain("cannot normalize a zero right-hand side".into()));
        }
        let mut c = self.coeffs.clone().expect("checked by norm");
        c.scale(1.0 / n);
        if self.evaluator.is_some() {
            Self::sine_series(c, self.smoothness)
        } else {
            Ok(Self::from_coeffs(c, self.smoothness))
        }
    }
}

/// Point values of `f`; needs an evaluator and enough smoothness for point
/// evaluation to be continuous.
pub fn sample_values(f: &RightHandSide, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let eval = f
        .evaluator
        .as_ref()
        .ok_or_else(|| Error::Capability("right-hand side has no point evaluator".into()))?;
    let d = f.domain.dim() as f64;
    if !(f.smoothness > d / 2.0) {
        return Err(Error::Domain(format!(
            "point evaluation needs smoothness above {} but f is declared in H^{}",
            d / 2.0,
            f.smoothness
        )));
    }
    points
        .iter()
        .map(|p| {
            if !f.domain.contains(p) {
                Err(Error::Domain(format!("sample point {p:?} outside the {}", f.domain.name())))
            } else {
                Ok(eval(p))
            }
        })
        .collect()
}

/// `u_k = f_k / eigenvalue(k)` for diagonal problems.
pub fn solve_diagonal(problem: &ModelProblem, f: &CoeffVector) -> Result<CoeffVector> {
    if !problem.is_diagonal() {
        return Err(Error::Config("solve_diagonal needs a diagonal problem".into()));
    }
    let basis = BasisId::new(problem.domain, BasisKind::Sine);
    if f.basis() != basis {
        return Err(Error::Domain("f must be given in the sine eigenbasis of the problem".into()));
    }
    let entries = f
        .iter()
        .map(|(i, c)| match i {
            Index::Mode(m) => problem.eigenvalue(*m).map(|e| (*i, c / e)),
            Index::Wavelet(_) => unreachable!("sine basis"),
        })
        .collect::<Result<Vec<_>>>()?;
    CoeffVector::from_entries(basis, entries)
}

/// Applies the operator: `f_k = eigenvalue(k) u_k`.
pub fn apply_diagonal(problem: &ModelProblem, u: &CoeffVector) -> Result<CoeffVector> {
    let entries = u
        .iter()
        .map(|(i, c)| match i {
            Index::Mode(m) => problem.eigenvalue(*m).map(|e| (*i, c * e)),
            Index::Wavelet(_) => Err(Error::Domain("apply_diagonal needs sine coefficients".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    CoeffVector::from_entries(u.basis(), entries)
}

/// Section of the solution operator on the first `size` eigenmodes, from
/// the `H^source` to the `H^target` sequence norm. Weights are `mu^(r/2)`
/// for the Laplacian eigenvalue `mu` of each mode.
pub fn operator_section(problem: &ModelProblem, source_smoothness: f64, target_smoothness: f64, size: usize) -> Result<FiniteSection> {
    if size == 0 {
        return Err(Error::Config("section size must be positive".into()));
    }
    let (eig, lap) = match problem.kind {
        ProblemKind::Diagonal(_) => {
            let modes = problem.modes(size)?;
            let eig = modes.iter().map(|m| problem.eigenvalue(*m)).collect::<Result<Vec<_>>>()?;
            let lap = modes.iter().map(|m| (PI * m.frequency()).powi(2)).collect::<Vec<_>>();
            (eig, lap)
        }
        ProblemKind::LShape { reference_level } => {
            let mu = lshape_eigenvalues(reference_level)?;
            if size > mu.len() {
                return Err(Error::Config(format!(
                    "the level-{reference_level} L-shape section has only {} modes",
                    mu.len()
                )));
            }
            let eig: Vec<f64> = mu[..size].iter().map(|m| m.powf(problem.order)).collect();
            (eig, mu[..size].to_vec())
        }
    };
    let origin = match problem.kind {
        ProblemKind::Diagonal(_) => SectionOrigin::Truncated,
        ProblemKind::LShape { .. } => SectionOrigin::Truncated,
    };
    FiniteSection::diagonal(
        eig.iter().map(|e| 1.0 / e).collect(),
        lap.iter().map(|m| m.powf(source_smoothness / 2.0)).collect(),
        lap.iter().map(|m| m.powf(target_smoothness / 2.0)).collect(),
        origin,
    )
}

/// Ascending eigenvalues of the lumped-mass P1 Dirichlet Laplacian on the
/// L-shape mesh of the given level.
pub fn lshape_eigenvalues(level: u32) -> Result<Vec<f64>> {
    if level == 0 || level > MAX_EIGEN_LEVEL {
        return Err(Error::Config(format!("L-shape eigenbasis level must be in 1..={MAX_EIGEN_LEVEL}")));
    }
    let grid = NodalGrid::zeros(Domain::LShape, level);
    let nodes = grid.interior_nodes();
    let n = nodes.len();
    let pos: std::collections::HashMap<[i32; 2], usize> = nodes.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let h2 = grid.h().powi(2);
    let mut k = DMatrix::<f64>::zeros(n, n);
    for (i, &[a, b]) in nodes.iter().enumerate() {
        k[(i, i)] = 4.0 / h2;
        for nb in [[a + 1, b], [a - 1, b], [a, b + 1], [a, b - 1]] {
            if let Some(&j) = pos.get(&nb) {
                k[(i, j)] = -1.0 / h2;
            }
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(k).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    if ev[0] <= 0.0 {
        return Err(Error::LinearAlgebra {
            message: "discrete Laplacian is not positive definite".into(),
            condition: f64::INFINITY,
        });
    }
    Ok(ev)
}
