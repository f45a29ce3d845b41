//! Piecewise-linear hierarchical basis on the uniform triangulation whose
//! cells are split along the `(1, 1)` diagonal.
//!
//! A node `(a, b)` of level `j` sits at `(a, b) * 2^-j` and is new at that
//! level unless both `a` and `b` are even. Its type is `(a odd) + 2 (b odd)`,
//! which selects the coarse edge it bisects. Basis functions are
//! `2^j * hat`, so the coefficient of a node is `2^-j` times its
//! hierarchical surplus and the `H^1` weight `2^j` returns the surplus itself.

use crate::par;

use super::{BasisId, BasisKind, CoeffVector, Domain, Index, WaveletIndex};

pub fn kind_of(node: [i32; 2]) -> u8 {
    (node[0].rem_euclid(2) as u8) + 2 * (node[1].rem_euclid(2) as u8)
}

pub fn is_valid(domain: Domain, w: &WaveletIndex) -> bool {
    if domain.dim() != 2 || w.level >= 30 || !domain.node_interior(w.level, w.translation) {
        return false;
    }
    if w.level == 0 {
        w.kind == 0
    } else {
        w.kind != 0 && w.kind == kind_of(w.translation)
    }
}

/// Box `[-n, n]^2` (L-shape) or `[0, n]^2` (square) of node coordinates at a level.
fn node_range(domain: Domain, level: u32) -> (i32, i32) {
    let n = 1i32 << level;
    match domain {
        Domain::LShape => (-n, n),
        _ => (0, n),
    }
}

/// New interior nodes of one level.
pub fn level_nodes(domain: Domain, level: u32) -> Vec<[i32; 2]> {
    let (lo, hi) = node_range(domain, level);
    let mut out = Vec::new();
    for b in lo..=hi {
        for a in lo..=hi {
            let node = [a, b];
            if domain.node_interior(level, node) && (level == 0 || kind_of(node) != 0) {
                out.push(node);
            }
        }
    }
    out
}

/// All hierarchical indices on levels `0..=max_level`, sorted.
pub fn enumerate(domain: Domain, max_level: u32) -> Vec<WaveletIndex> {
    let mut out: Vec<WaveletIndex> = (0..=max_level)
        .flat_map(|level| {
            level_nodes(domain, level).into_iter().map(move |node| {
                let kind = if level == 0 { 0 } else { kind_of(node) };
                WaveletIndex::new(level, node, kind)
            })
        })
        .collect();
    out.sort();
    out
}

/// End points, on the same level grid, of the coarse edge a node bisects.
pub fn parents(node: [i32; 2]) -> [[i32; 2]; 2] {
    let [a, b] = node;
    match kind_of(node) {
        1 => [[a - 1, b], [a + 1, b]],
        2 => [[a, b - 1], [a, b + 1]],
        _ => [[a - 1, b - 1], [a + 1, b + 1]],
    }
}

/// Nodal hat function of the reference mesh, `max(0, 1 - max(|x|, |y|, |x - y|))`.
pub fn hat(x: f64, y: f64) -> f64 {
    (1.0 - x.abs().max(y.abs()).max((x - y).abs())).max(0.0)
}

pub fn eval(w: &WaveletIndex, point: &[f64]) -> f64 {
    let scale = (1u64 << w.level) as f64;
    let x = point[0] * scale - w.translation[0] as f64;
    let y = point[1] * scale - w.translation[1] as f64;
    scale * hat(x, y)
}

/// Which nodes enter a hierarchical expansion.
///
/// Levels up to `full_level` are complete. Levels `full_level + 1 ..= deep_level`
/// keep only nodes with `max(|a|, |b|) <= corner_window` on their own grid, a
/// window around the origin whose physical size halves per level.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RefinementPlan {
    pub full_level: u32,
    pub deep_level: u32,
    pub corner_window: i32,
}

impl RefinementPlan {
    pub fn uniform(level: u32) -> Self {
        RefinementPlan {
            full_level: level,
            deep_level: level,
            corner_window: 0,
        }
    }

    pub fn nodes(&self, domain: Domain, level: u32) -> Vec<[i32; 2]> {
        if level <= self.full_level {
            return level_nodes(domain, level);
        }
        let w = self.corner_window;
        let mut out = Vec::new();
        for b in -w..=w {
            for a in -w..=w {
                let node = [a, b];
                if domain.node_interior(level, node) && kind_of(node) != 0 {
                    out.push(node);
                }
            }
        }
        out
    }
}

/// Hierarchical coefficients of a function that vanishes on the boundary.
pub fn coefficients<F>(domain: Domain, u: F, plan: &RefinementPlan) -> CoeffVector
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    let mut entries: Vec<(Index, f64)> = Vec::new();
    for level in 0..=plan.deep_level {
        let h = 2f64.powi(-(level as i32));
        let nodes = plan.nodes(domain, level);
        let at = |p: [i32; 2]| u(p[0] as f64 * h, p[1] as f64 * h);
        let coeffs = par::map(&nodes, |&node| {
            let value = at(node);
            let surplus = if level == 0 {
                value
            } else {
                let [p, q] = parents(node);
                value - 0.5 * (at(p) + at(q))
            };
            let kind = if level == 0 { 0 } else { kind_of(node) };
            (Index::Wavelet(WaveletIndex::new(level, node, kind)), h * surplus)
        });
        entries.extend(coeffs);
    }
    CoeffVector::from_entries(BasisId::new(domain, BasisKind::Hierarchical), entries)
        .expect("plan only produces interior nodes")
}

/// Nodal values on the closed box of a level grid; zero outside the domain.
#[derive(Clone, Debug)]
pub struct NodalGrid {
    pub domain: Domain,
    pub level: u32,
    lo: i32,
    side: usize,
    values: Vec<f64>,
}

impl NodalGrid {
    pub fn zeros(domain: Domain, level: u32) -> Self {
        let (lo, hi) = node_range(domain, level);
        let side = (hi - lo + 1) as usize;
        NodalGrid {
            domain,
            level,
            lo,
            side,
            values: vec![0.0; side * side],
        }
    }

    pub fn h(&self) -> f64 {
        2f64.powi(-(self.level as i32))
    }

    fn slot(&self, node: [i32; 2]) -> Option<usize> {
        let a = node[0] - self.lo;
        let b = node[1] - self.lo;
        if a < 0 || b < 0 || a as usize >= self.side || b as usize >= self.side {
            None
        } else {
            Some(b as usize * self.side + a as usize)
        }
    }

    pub fn get(&self, node: [i32; 2]) -> f64 {
        self.slot(node).map(|s| self.values[s]).unwrap_or(0.0)
    }

    pub fn set(&mut self, node: [i32; 2], value: f64) {
        if let Some(s) = self.slot(node) {
            self.values[s] = value;
        }
    }

    /// Value at the grid point nearest to `(x, y)`.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let n = (1i64 << self.level) as f64;
        self.get([(x * n).round() as i32, (y * n).round() as i32])
    }

    /// Raw values on the node box, row-major from the lower-left node.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Interior nodes in row-major order.
    pub fn interior_nodes(&self) -> Vec<[i32; 2]> {
        let hi = self.lo + self.side as i32 - 1;
        let mut out = Vec::new();
        for b in self.lo..=hi {
            for a in self.lo..=hi {
                if self.domain.node_interior(self.level, [a, b]) {
                    out.push([a, b]);
                }
            }
        }
        out
    }

    /// Interpolates a function at the interior nodes.
    pub fn interpolate<F: Fn(f64, f64) -> f64>(domain: Domain, level: u32, u: F) -> Self {
        let mut g = NodalGrid::zeros(domain, level);
        let h = g.h();
        for node in g.interior_nodes() {
            g.set(node, u(node[0] as f64 * h, node[1] as f64 * h));
        }
        g
    }

    /// `H^1` seminorm inner product of the two P1 functions. On this mesh the
    /// diagonal couplings vanish and the form reduces to axis-parallel edge
    /// differences.
    pub fn energy_inner(&self, other: &NodalGrid) -> f64 {
        let hi = self.lo + self.side as i32 - 1;
        let mut sum = 0.0;
        for b in self.lo..=hi {
            for a in self.lo..=hi {
                let here = [a, b];
                if !self.domain.node_interior(self.level, here) {
                    continue;
                }
                // each edge with at least one interior end point, counted once
                for nb in [[a + 1, b], [a - 1, b], [a, b + 1], [a, b - 1]] {
                    let nb_interior = self.domain.node_interior(self.level, nb);
                    if nb_interior && (nb[1], nb[0]) < (b, a) {
                        continue;
                    }
                    let du = self.get(here) - self.get(nb);
                    let dv = other.get(here) - other.get(nb);
                    sum += du * dv;
                }
            }
        }
        sum
    }
}
