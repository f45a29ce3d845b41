//! Poisson problem on the L-shape: manufactured solutions with corner
//! singularities, a conforming P1 Galerkin reference solver on uniform
//! meshes, and coefficient extraction in the Haar and hierarchical bases.

use std::f64::consts::PI;

use crate::bases::hierarchical::{self, NodalGrid, RefinementPlan};
use crate::bases::{haar, BasisId, BasisKind, CoeffVector, Domain, Index};
use crate::error::{Error, Result};
use crate::par;

use super::quadrature::{gauss_on, rectangle_rule, triangle_rule};
use super::singular::{SingularFunction, REENTRANT};
use super::RightHandSide;

/// Finest Galerkin level accepted (about 800k unknowns on the L-shape).
pub const MAX_REFERENCE_LEVEL: u32 = 10;
/// Gap between the reference mesh and the coarsest level it must resolve.
pub const REFERENCE_GAP: u32 = 3;

/// How the singular functions of a manufactured solution are made to vanish
/// on the edges away from their corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Envelope {
    /// The radial cutoff built into `S_{l,m}`.
    Cutoff,
    /// The bubble `b = (1 - x^2)(1 - y^2)` times the uncut profile, for the
    /// reentrant corner. `b g = S + (b - zeta) g` where the second term is
    /// `O(r^{l+2})` at the corner, so the singular part is unchanged while
    /// the smooth content is far smaller than with the cutoff's transition.
    Bubble,
}

fn bubble(p: [f64; 2]) -> f64 {
    (1.0 - p[0] * p[0]) * (1.0 - p[1] * p[1])
}

/// `u = A sin(pi x) sin(pi y) + sum c S`. The regular part vanishes on the
/// whole boundary of the L-shape.
#[derive(Clone, Debug)]
pub struct ManufacturedSolution {
    pub regular_amplitude: f64,
    pub singular: Vec<(SingularFunction, f64)>,
    pub envelope: Envelope,
}

impl ManufacturedSolution {
    /// `singular_coeffs` lists `(corner, mode, coefficient)`.
    pub fn new(regular_amplitude: f64, singular_coeffs: &[(usize, u32, f64)]) -> Result<Self> {
        let singular = singular_coeffs
            .iter()
            .map(|&(l, m, c)| SingularFunction::lshape(l, m).map(|s| (s, c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ManufacturedSolution {
            regular_amplitude,
            singular,
            envelope: Envelope::Cutoff,
        })
    }

    /// Bubble-weighted reentrant-corner functions; `modes` lists
    /// `(mode, coefficient)`.
    pub fn with_bubble(regular_amplitude: f64, modes: &[(u32, f64)]) -> Result<Self> {
        let coeffs: Vec<(usize, u32, f64)> = modes.iter().map(|&(m, c)| (REENTRANT, m, c)).collect();
        Ok(ManufacturedSolution {
            envelope: Envelope::Bubble,
            ..Self::new(regular_amplitude, &coeffs)?
        })
    }

    pub fn regular(&self, p: [f64; 2]) -> f64 {
        self.regular_amplitude * (PI * p[0]).sin() * (PI * p[1]).sin()
    }

    fn singular_term(&self, s: &SingularFunction, p: [f64; 2]) -> f64 {
        match self.envelope {
            Envelope::Cutoff => s.eval_unchecked(p),
            Envelope::Bubble => bubble(p) * s.harmonic(p),
        }
    }

    fn singular_laplacian(&self, s: &SingularFunction, p: [f64; 2]) -> f64 {
        match self.envelope {
            Envelope::Cutoff => s.laplacian_unchecked(p),
            Envelope::Bubble => {
                // Delta(b g) = g Delta b + 2 grad b . grad g for harmonic g
                let [x, y] = p;
                let lap_b = -2.0 * (1.0 - y * y) - 2.0 * (1.0 - x * x);
                let grad_b = [-2.0 * x * (1.0 - y * y), -2.0 * y * (1.0 - x * x)];
                let grad_g = s.harmonic_gradient(p);
                s.harmonic(p) * lap_b + 2.0 * (grad_b[0] * grad_g[0] + grad_b[1] * grad_g[1])
            }
        }
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.regular(p) + self.singular.iter().map(|(s, c)| c * self.singular_term(s, p)).sum::<f64>()
    }

    /// `f = -Delta u`.
    pub fn rhs(&self, p: [f64; 2]) -> f64 {
        2.0 * PI * PI * self.regular(p) - self.singular.iter().map(|(s, c)| c * self.singular_laplacian(s, p)).sum::<f64>()
    }

    fn singular_vertices(&self) -> Vec<[f64; 2]> {
        self.singular.iter().map(|(s, _)| s.corner.vertex).collect()
    }

    pub fn hierarchical_coefficients(&self, plan: &RefinementPlan) -> CoeffVector {
        hierarchical::coefficients(Domain::LShape, |x, y| self.eval([x, y]), plan)
    }

    /// Haar coefficients up to wavelet level `levels - 1` from cell averages
    /// at level `levels`, with corner-graded quadrature on cells touching a
    /// singular vertex.
    pub fn haar_coefficients(&self, levels: u32) -> CoeffVector {
        let vertices = self.singular_vertices();
        haar_from_averages(levels, |x0, y0, h| cell_average(&|p| self.eval(p), x0, y0, h, &vertices))
    }
}

/// Average of `u` over `[x0, x0+h] x [y0, y0+h]`.
fn cell_average(u: &dyn Fn([f64; 2]) -> f64, x0: f64, y0: f64, h: f64, vertices: &[[f64; 2]]) -> f64 {
    let tol = 1e-12;
    let corner = vertices.iter().find_map(|v| {
        let gx = [x0, x0 + h].into_iter().find(|x| (x - v[0]).abs() < tol)?;
        let gy = [y0, y0 + h].into_iter().find(|y| (y - v[1]).abs() < tol)?;
        Some((gx, gy))
    });
    let near = vertices.iter().any(|v| {
        let dx = (v[0] - (x0 + h / 2.0)).abs() - h / 2.0;
        let dy = (v[1] - (y0 + h / 2.0)).abs() - h / 2.0;
        dx.max(0.0).hypot(dy.max(0.0)) < 2.0 * h
    });
    let sum: f64 = if corner.is_some() {
        rectangle_rule(x0, x0 + h, y0, y0 + h, corner, 0).iter().map(|(p, w)| w * u(*p)).sum()
    } else if near {
        let half = h / 2.0;
        (0..4)
            .map(|q| {
                let (a, b) = (x0 + (q % 2) as f64 * half, y0 + (q / 2) as f64 * half);
                rectangle_rule(a, a + half, b, b + half, None, 8).iter().map(|(p, w)| w * u(*p)).sum::<f64>()
            })
            .sum()
    } else {
        rectangle_rule(x0, x0 + h, y0, y0 + h, None, 6).iter().map(|(p, w)| w * u(*p)).sum()
    };
    sum / (h * h)
}

/// Haar coefficients on the L-shape from a cell-average oracle
/// `avg(x0, y0, h)` at level `levels`.
fn haar_from_averages<F>(levels: u32, avg: F) -> CoeffVector
where
    F: Fn(f64, f64, f64) -> f64 + Sync + Send,
{
    let n = 1usize << levels;
    let h = 1.0 / n as f64;
    let mut entries: Vec<(Index, f64)> = Vec::new();
    for origin in haar::unit_cells(Domain::LShape) {
        let averages = par::map_range(0..n * n, |c| {
            let (ix, iy) = (c % n, c / n);
            avg(origin[0] as f64 + ix as f64 * h, origin[1] as f64 + iy as f64 * h, h)
        });
        entries.extend(
            haar::from_cell_averages_2d(origin, &averages)
                .into_iter()
                .map(|(w, c)| (Index::Wavelet(w), c)),
        );
    }
    CoeffVector::from_entries(BasisId::new(Domain::LShape, BasisKind::Haar), entries).expect("L-shape Haar indices")
}

/// Lower-left nodes of the mesh cells inside the domain.
fn mesh_cells(domain: Domain, level: u32) -> Vec<[i32; 2]> {
    let n = 1i32 << level;
    let lo = if domain == Domain::LShape { -n } else { 0 };
    let mut out = Vec::new();
    for b in lo..n {
        for a in lo..n {
            if domain.cube_inside(level, [a, b]) {
                out.push([a, b]);
            }
        }
    }
    out
}

/// The two triangles of a cell along its "/" diagonal.
fn cell_triangles(c: [i32; 2]) -> [[[i32; 2]; 3]; 2] {
    let [a, b] = c;
    [[[a, b], [a + 1, b], [a + 1, b + 1]], [[a, b], [a + 1, b + 1], [a, b + 1]]]
}

/// Applies `g(point, barycentric, weight)` at the triangle-rule points of
/// every triangle of the cell; `weight` includes the triangle area.
fn for_cell_points(cell: [i32; 2], h: f64, mut g: impl FnMut(usize, [f64; 2], [f64; 3], f64)) {
    let area = h * h / 2.0;
    for (t, tri) in cell_triangles(cell).iter().enumerate() {
        for (l, w) in triangle_rule() {
            let x = (l[0] * tri[0][0] as f64 + l[1] * tri[1][0] as f64 + l[2] * tri[2][0] as f64) * h;
            let y = (l[0] * tri[0][1] as f64 + l[1] * tri[1][1] as f64 + l[2] * tri[2][1] as f64) * h;
            g(t, [x, y], l, w * area);
        }
    }
}

#[derive(Clone, Debug)]
pub struct GalerkinSolution {
    pub grid: NodalGrid,
    pub iterations: usize,
    /// Final relative residual of the CG iteration.
    pub residual: f64,
    /// `F . U`, the discrete energy `|u_h|_1^2`.
    pub discrete_energy: f64,
}

impl GalerkinSolution {
    /// P1 interpolant value at a point inside the domain.
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let n = (1i64 << self.grid.level) as f64;
        let (x, y) = (p[0] * n, p[1] * n);
        let (a, b) = (x.floor(), y.floor());
        let (s, t) = (x - a, y - b);
        let (a, b) = (a as i32, b as i32);
        let u = |i: i32, j: i32| self.grid.get([a + i, b + j]);
        if s >= t {
            // triangle (0,0), (1,0), (1,1)
            (1.0 - s) * u(0, 0) + (s - t) * u(1, 0) + t * u(1, 1)
        } else {
            (1.0 - t) * u(0, 0) + (t - s) * u(0, 1) + s * u(1, 1)
        }
    }

    /// `||u - u_h||_{L2}` for a closed-form `u`, by the triangle rule.
    pub fn l2_error(&self, u: &(dyn Fn([f64; 2]) -> f64 + Sync)) -> f64 {
        let h = self.grid.h();
        let cells = mesh_cells(self.grid.domain, self.grid.level);
        let per = par::map(&cells, |&c| {
            let mut sum = 0.0;
            let tris = cell_triangles(c);
            for_cell_points(c, h, |t, p, l, w| {
                let uh: f64 = (0..3).map(|v| l[v] * self.grid.get(tris[t][v])).sum();
                sum += w * (u(p) - uh).powi(2);
            });
            sum
        });
        per.iter().sum::<f64>().sqrt()
    }

    /// `|u - u_h|_{H^1}` from `int f u - F . U` (Galerkin orthogonality).
    pub fn energy_error(
        &self,
        u: &(dyn Fn([f64; 2]) -> f64 + Sync),
        f: &(dyn Fn([f64; 2]) -> f64 + Sync),
    ) -> f64 {
        let h = self.grid.h();
        let cells = mesh_cells(self.grid.domain, self.grid.level);
        let per = par::map(&cells, |&c| {
            let mut sum = 0.0;
            for_cell_points(c, h, |_, p, _, w| sum += w * f(p) * u(p));
            sum
        });
        let exact: f64 = per.iter().sum();
        (exact - self.discrete_energy).max(0.0).sqrt()
    }
}

/// Conforming P1 Galerkin solve of `-Delta u = f` with zero boundary values
/// on the uniform "/" triangulation of mesh width `2^-level`.
pub fn galerkin_solve(domain: Domain, level: u32, f: &(dyn Fn([f64; 2]) -> f64 + Sync)) -> Result<GalerkinSolution> {
    if domain.dim() != 2 {
        return Err(Error::Config("the Galerkin solver handles the square and the L-shape".into()));
    }
    if level == 0 || level > MAX_REFERENCE_LEVEL {
        return Err(Error::Config(format!("Galerkin level {level} outside 1..={MAX_REFERENCE_LEVEL}")));
    }
    let mut grid = NodalGrid::zeros(domain, level);
    let h = grid.h();
    let nodes = grid.interior_nodes();
    let mut slot = NodalGrid::zeros(domain, level);
    for (i, &nd) in nodes.iter().enumerate() {
        slot.set(nd, (i + 1) as f64);
    }
    let index = |nd: [i32; 2]| -> Option<usize> {
        let v = slot.get(nd);
        (v > 0.0).then(|| v as usize - 1)
    };
    let neighbours: Vec<[Option<usize>; 4]> = nodes
        .iter()
        .map(|&[a, b]| [index([a + 1, b]), index([a - 1, b]), index([a, b + 1]), index([a, b - 1])])
        .collect();

    // load vector, accumulated cell by cell
    let cells = mesh_cells(domain, level);
    let contributions = par::map(&cells, |&c| {
        let tris = cell_triangles(c);
        let mut local = [[0.0; 3]; 2];
        for_cell_points(c, h, |t, p, l, w| {
            let fv = f(p);
            for v in 0..3 {
                local[t][v] += w * fv * l[v];
            }
        });
        (tris, local)
    });
    let mut load = vec![0.0; nodes.len()];
    for (tris, local) in &contributions {
        for t in 0..2 {
            for v in 0..3 {
                if let Some(i) = index(tris[t][v]) {
                    load[i] += local[t][v];
                }
            }
        }
    }

    let apply = |x: &[f64]| -> Vec<f64> {
        par::map_range(0..x.len(), |i| {
            4.0 * x[i] - neighbours[i].iter().flatten().map(|&j| x[j]).sum::<f64>()
        })
    };
    let dot = |a: &[f64], b: &[f64]| par::sum_range(0..a.len(), |i| a[i] * b[i]);

    // conjugate gradients; the Jacobi preconditioner is the constant 1/4
    let n = nodes.len();
    let mut x = vec![0.0; n];
    let mut r = load.clone();
    let mut p = r.clone();
    let norm_b = dot(&load, &load).sqrt();
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    let tol = 1e-12;
    let max_iter = 20 * n.max(10);
    while rr.sqrt() > tol * norm_b && iterations < max_iter {
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        iterations += 1;
    }
    let residual = if norm_b > 0.0 { rr.sqrt() / norm_b } else { 0.0 };
    if residual > tol * 10.0 {
        return Err(Error::Numerical {
            message: format!("CG did not converge in {iterations} iterations"),
            residual,
        });
    }
    for (i, &nd) in nodes.iter().enumerate() {
        grid.set(nd, x[i]);
    }
    let discrete_energy = dot(&load, &x);
    Ok(GalerkinSolution {
        grid,
        iterations,
        residual,
        discrete_energy,
    })
}

/// Cell averages of a P1 function on the reference grid over the Haar cells
/// of level `levels`.
fn p1_average(grid: &NodalGrid, x0: f64, y0: f64, levels: u32) -> f64 {
    let n = 1i64 << grid.level;
    let per = 1i32 << (grid.level - levels);
    let (a0, b0) = ((x0 * n as f64).round() as i32, (y0 * n as f64).round() as i32);
    let mut sum = 0.0;
    for b in b0..b0 + per {
        for a in a0..a0 + per {
            let u = |i: i32, j: i32| grid.get([a + i, b + j]);
            sum += (2.0 * u(0, 0) + u(1, 0) + 2.0 * u(1, 1) + u(0, 1)) / 6.0;
        }
    }
    sum / (per * per) as f64
}

/// Coefficients of `u = u_f + sum c S_{l,m}` on the L-shape, where `u_f` is
/// the Galerkin solution of `-Delta u_f = f` on the mesh of level
/// `reference_level` and the singular part is added in closed form.
///
/// `levels` is the Haar resolution (coefficients of wavelet levels
/// `< levels`) or the deepest hierarchical level.
pub fn lshape_solution(
    f: &RightHandSide,
    singular_coeffs: &[(usize, u32, f64)],
    reference_level: u32,
    basis: BasisKind,
    levels: u32,
) -> Result<CoeffVector> {
    if basis == BasisKind::Sine {
        return Err(Error::Config("the L-shape has no sine basis".into()));
    }
    if reference_level < levels + REFERENCE_GAP {
        return Err(Error::Config(format!(
            "reference level {reference_level} must be at least {} for {levels} levels",
            levels + REFERENCE_GAP
        )));
    }
    let singular = ManufacturedSolution::new(0.0, singular_coeffs)?;
    let galerkin = if f.is_zero() {
        None
    } else {
        let eval = f.evaluator().ok_or_else(|| {
            Error::Capability("the Galerkin solve needs a point evaluator for f".into())
        })?;
        Some(galerkin_solve(Domain::LShape, reference_level, &|p| eval(&p))?)
    };
    match basis {
        BasisKind::Hierarchical => {
            let plan = RefinementPlan::uniform(levels);
            Ok(hierarchical::coefficients(
                Domain::LShape,
                |x, y| galerkin.as_ref().map(|g| g.grid.value_at(x, y)).unwrap_or(0.0) + singular.eval([x, y]),
                &plan,
            ))
        }
        BasisKind::Haar => {
            let vertices = singular.singular_vertices();
            Ok(haar_from_averages(levels, |x0, y0, h| {
                let smooth = galerkin.as_ref().map(|g| p1_average(&g.grid, x0, y0, levels)).unwrap_or(0.0);
                smooth + cell_average(&|p| singular.eval(p), x0, y0, h, &vertices)
            }))
        }
        BasisKind::Sine => unreachable!(),
    }
}

/// `int |grad S|^2` by polar quadrature (non-logarithmic functions).
pub fn singular_energy(s: &SingularFunction) -> f64 {
    // |grad(zeta g)|^2 with g = r^l sin(l t): (zeta' g + zeta g_r)^2 + (zeta g_t / r)^2
    let l = s.exponent;
    let radial = super::quadrature::graded_on(0.0, s.cutoff.radius, 0.0);
    let angular = gauss_on(0.0, s.corner.angle, 24);
    let mut sum = 0.0;
    for &(r, wr) in &radial {
        for &(t, wt) in &angular {
            let (z, dz) = (s.cutoff.value(r), s.cutoff.d1(r));
            let g = r.powf(l) * (l * t).sin();
            let gr = l * r.powf(l - 1.0) * (l * t).sin();
            let gt = l * r.powf(l) * (l * t).cos();
            sum += wr * wt * r * ((dz * g + z * gr).powi(2) + (z * gt / r).powi(2));
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{sequence_norm, SobolevWeight};
    use crate::problems::singular::REENTRANT;

    fn smooth() -> ManufacturedSolution {
        ManufacturedSolution::new(1.0, &[]).unwrap()
    }

    #[test]
    fn bubble_solution_vanishes_on_the_boundary() {
        let m = ManufacturedSolution::with_bubble(0.0, &[(1, 1.0), (2, 0.5)]).unwrap();
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            for p in [[s, 0.0], [1.0, s], [2.0 * s - 1.0, 1.0], [-1.0, 2.0 * s - 1.0], [-s, -1.0], [0.0, -s]] {
                assert!(m.eval(p).abs() < 1e-14, "{p:?} {}", m.eval(p));
            }
        }
        assert!(matches!(ManufacturedSolution::with_bubble(0.0, &[(0, 1.0)]), Err(Error::Domain(_))));
    }

    #[test]
    fn bubble_rhs_matches_finite_differences() {
        let m = ManufacturedSolution::with_bubble(0.7, &[(1, 1.0)]).unwrap();
        let h = 1e-4;
        for p in [[0.3, 0.4], [-0.5, 0.2], [-0.6, -0.7], [0.05, 0.9], [-0.2, -0.01]] {
            let lap = (m.eval([p[0] + h, p[1]]) + m.eval([p[0] - h, p[1]]) + m.eval([p[0], p[1] + h]) + m.eval([p[0], p[1] - h])
                - 4.0 * m.eval(p))
                / (h * h);
            assert!((m.rhs(p) + lap).abs() < 1e-5 * (1.0 + lap.abs()), "{p:?}: {} vs {}", m.rhs(p), -lap);
        }
    }

    #[test]
    fn bubble_galerkin_solution_converges() {
        let m = ManufacturedSolution::with_bubble(0.0, &[(1, 1.0)]).unwrap();
        let errs: Vec<f64> = (3..=6)
            .map(|lvl| galerkin_solve(Domain::LShape, lvl, &|p| m.rhs(p)).unwrap().l2_error(&|p| m.eval(p)))
            .collect();
        // L2 convergence is limited to h^{4/3} by the corner
        for w in errs.windows(2) {
            assert!(w[1] < 0.5 * w[0], "{errs:?}");
        }
    }

    #[test]
    fn galerkin_l2_error_decays_quadratically() {
        let m = smooth();
        let errs: Vec<f64> = (3..=6)
            .map(|lvl| galerkin_solve(Domain::LShape, lvl, &|p| m.rhs(p)).unwrap().l2_error(&|p| m.eval(p)))
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 1.9 && rate < 2.2, "L2 rate {rate}");
        }
    }

    #[test]
    fn galerkin_energy_error_decays_linearly() {
        let m = smooth();
        let errs: Vec<f64> = (3..=6)
            .map(|lvl| {
                galerkin_solve(Domain::LShape, lvl, &|p| m.rhs(p))
                    .unwrap()
                    .energy_error(&|p| m.eval(p), &|p| m.rhs(p))
            })
            .collect();
        let slope = (errs[0] / errs[3]).log2() / 3.0;
        assert!(slope >= 0.9, "energy slope {slope}");
    }

    #[test]
    fn galerkin_on_square_matches_eigenfunction() {
        // -Delta sin(pi x) sin(pi y) = 2 pi^2 sin sin on the unit square
        let f = |p: [f64; 2]| 2.0 * PI * PI * (PI * p[0]).sin() * (PI * p[1]).sin();
        let sol = galerkin_solve(Domain::Square, 6, &f).unwrap();
        let err = sol.l2_error(&|p| (PI * p[0]).sin() * (PI * p[1]).sin());
        assert!(err < 1e-3, "{err}");
        assert!(galerkin_solve(Domain::Interval, 4, &f).is_err());
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let u = lshape_solution(&RightHandSide::zero(Domain::LShape), &[], 5, BasisKind::Haar, 2).unwrap();
        assert!(u.is_empty());
    }

    #[test]
    fn reference_level_must_exceed_levels() {
        let r = lshape_solution(&RightHandSide::zero(Domain::LShape), &[], 4, BasisKind::Haar, 2);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn singular_part_alone_matches_closed_form() {
        let u = lshape_solution(&RightHandSide::zero(Domain::LShape), &[(REENTRANT, 1, 1.0)], 6, BasisKind::Haar, 3).unwrap();
        let m = ManufacturedSolution::new(0.0, &[(REENTRANT, 1, 1.0)]).unwrap();
        assert_eq!(u, m.haar_coefficients(3));
        // the scaling coefficient of the cell [-1,0]^2 is the mean of S there, a
        // quarter-annulus integral of r^{2/3} sin(2 t / 3) times the cutoff
        let s = &m.singular[0].0;
        let rule = super::super::quadrature::sector_rule(s.cutoff.radius, PI, 1.5 * PI, 24);
        let exact: f64 = rule.iter().map(|(r, t, w)| w * s.cutoff.value(*r) * r.powf(2.0 / 3.0) * (2.0 * t / 3.0).sin()).sum();
        let got = u.get(&Index::Wavelet(crate::bases::WaveletIndex::new(0, [-1, -1], 0)));
        // the sector rule has panel breaks at the cutoff kinks, the tensor rule not
        assert!((got - exact).abs() < 1e-8, "{got} vs {exact}");
    }

    #[test]
    fn galerkin_route_reproduces_manufactured_haar_coefficients() {
        let m = smooth();
        let eval = std::sync::Arc::new(move |p: &[f64]| 2.0 * PI * PI * (PI * p[0]).sin() * (PI * p[1]).sin());
        let f = RightHandSide::from_fn(Domain::LShape, eval, 0.0);
        let g = lshape_solution(&f, &[], 8, BasisKind::Haar, 4).unwrap();
        let exact = m.haar_coefficients(4);
        let mut diff = exact.clone();
        diff.axpy(-1.0, &g).unwrap();
        let w = SobolevWeight::l2();
        assert!(sequence_norm(&diff, &w) < 1e-3 * sequence_norm(&exact, &w));
    }

    #[test]
    fn hierarchical_energy_of_interpolant_approaches_singular_energy() {
        let m = ManufacturedSolution::new(0.0, &[(REENTRANT, 1, 1.0)]).unwrap();
        let exact = singular_energy(&m.singular[0].0);
        let e = |lvl: u32| {
            let g = NodalGrid::interpolate(Domain::LShape, lvl, |x, y| m.eval([x, y]));
            g.energy_inner(&g)
        };
        let (e6, e8) = (e(6), e(8));
        assert!((exact - e8).abs() < (exact - e6).abs());
        assert!((exact - e8).abs() < 0.02 * exact, "{e8} vs {exact}");
    }
}
