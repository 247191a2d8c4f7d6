//! Saddle connections by breadth-first unfolding of the triangulated surface.
//!
//! From each triangle corner a wedge of directions is pushed across successive
//! triangles. A vertex that appears strictly inside the wedge is visible from
//! the start point, so the segment to it is a saddle connection; the wedge is
//! then split at that vertex. Wedges are dropped once the crossed edge is
//! farther away than any connection within the bound can reach.

use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::Lattice2;
use super::triangulation::cross;
use super::TranslationSurface;
use crate::error::{Error, Result};

pub const BUDGET_ENV: &str = "TEICH_LAB_BUDGET";
const DEFAULT_BUDGET: usize = 1_000_000;
const QUANTUM: f64 = 1e-9;
const ANGLE_TOL: f64 = 1e-11;

/// Node budget from `TEICH_LAB_BUDGET`, falling back to one million.
pub fn default_budget() -> usize {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&b: &usize| b > 0)
        .unwrap_or(DEFAULT_BUDGET)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleConnection {
    #[serde(serialize_with = "ser_complex")]
    pub holonomy: Complex64,
    /// Start corner `(polygon, vertex)`.
    pub start: (usize, usize),
    /// Original polygon edges `(polygon, edge)` crossed, in order.
    pub path: Vec<(usize, usize)>,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

impl SaddleConnection {
    pub fn max_norm(&self) -> f64 {
        self.holonomy.re.abs().max(self.holonomy.im.abs())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystoleNorm {
    /// `max(|Re v|, |Im v|)`
    #[default]
    Max,
    Euclidean,
}

impl SystoleNorm {
    pub fn of(&self, z: Complex64) -> f64 {
        match self {
            SystoleNorm::Max => z.re.abs().max(z.im.abs()),
            SystoleNorm::Euclidean => z.norm(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystoleMethod {
    /// Period lattice for one-point tori, unfolding otherwise.
    #[default]
    Auto,
    Unfolding,
}

/// Search settings for [`TranslationSurface::saddle_connections_with`].
#[derive(Clone, Copy, Debug)]
pub struct SaddleSearch {
    pub budget: usize,
    pub parallel: bool,
}

impl Default for SaddleSearch {
    fn default() -> Self {
        Self {
            budget: default_budget(),
            parallel: true,
        }
    }
}

struct Node {
    tri: usize,
    /// Edge of `tri` about to be crossed.
    edge: usize,
    /// Developed position of `tri`'s local frame.
    offset: Complex64,
    right: Complex64,
    left: Complex64,
    parent: usize,
    crossed: Option<(usize, usize)>,
}

struct Found {
    v: Complex64,
    node: usize,
}

fn canonical(v: Complex64) -> Complex64 {
    let tol = 1e-12 * v.norm();
    if v.re > tol || (v.re.abs() <= tol && v.im > 0.0) {
        v
    } else {
        -v
    }
}

fn key(v: Complex64) -> (i64, i64) {
    let c = canonical(v);
    ((c.re / QUANTUM).round() as i64, (c.im / QUANTUM).round() as i64)
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a).re * ab.re + (p - a).im * ab.im) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

impl TranslationSurface {
    fn vertex(&self, tri: usize, k: usize) -> Complex64 {
        let t = &self.triangles()[tri];
        self.polygons()[t.poly][t.v[k % 3]]
    }

    /// Saddle connections with max-norm holonomy at most `bound`, one per `±` pair,
    /// sorted by `(|v|, arg v)`.
    pub fn saddle_connections(&self, bound: f64) -> Result<Vec<SaddleConnection>> {
        self.saddle_connections_with(bound, SaddleSearch::default())
    }

    pub fn saddle_connections_with(
        &self,
        bound: f64,
        opts: SaddleSearch,
    ) -> Result<Vec<SaddleConnection>> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::Precondition(format!("bound {bound} must be positive")));
        }
        let corners: Vec<(usize, usize)> = (0..self.triangles().len())
            .flat_map(|t| (0..3).map(move |k| (t, k)))
            .collect();
        let per_corner: Vec<Result<(Vec<SaddleConnection>, usize)>> = if opts.parallel {
            corners
                .par_iter()
                .map(|&(t, k)| self.search_corner(t, k, bound, opts.budget))
                .collect()
        } else {
            corners
                .iter()
                .map(|&(t, k)| self.search_corner(t, k, bound, opts.budget))
                .collect()
        };
        let mut used = 0usize;
        let mut seen: HashMap<(i64, i64), usize> = HashMap::new();
        let mut out: Vec<SaddleConnection> = Vec::new();
        for r in per_corner {
            let (found, nodes) = r?;
            used += nodes;
            if used > opts.budget {
                return Err(Error::BudgetExceeded { limit: opts.budget });
            }
            for sc in found {
                seen.entry(key(sc.holonomy)).or_insert_with(|| {
                    out.push(sc);
                    out.len() - 1
                });
            }
        }
        for sc in &mut out {
            let c = canonical(sc.holonomy);
            if c != sc.holonomy {
                sc.holonomy = c;
                sc.path.reverse();
            }
        }
        out.sort_by(|a, b| {
            a.holonomy
                .norm()
                .total_cmp(&b.holonomy.norm())
                .then(a.holonomy.arg().total_cmp(&b.holonomy.arg()))
        });
        Ok(out)
    }

    fn search_corner(
        &self,
        t0: usize,
        k0: usize,
        bound: f64,
        budget: usize,
    ) -> Result<(Vec<SaddleConnection>, usize)> {
        let tris = self.triangles();
        let within = |v: Complex64| v.re.abs().max(v.im.abs()) <= bound * (1.0 + 1e-12);
        let reach = bound * std::f64::consts::SQRT_2 * (1.0 + 1e-9);
        let p = self.vertex(t0, k0);
        let start = (tris[t0].poly, tris[t0].v[k0]);
        let right = self.vertex(t0, k0 + 1) - p;
        let left = self.vertex(t0, k0 + 2) - p;
        let mut arena: Vec<Node> = Vec::new();
        let mut found: Vec<Found> = Vec::new();
        // Triangle sides at this corner are saddle connections themselves.
        for v in [right, left] {
            if within(v) {
                found.push(Found { v, node: usize::MAX });
            }
        }
        let mut queue = VecDeque::new();
        if segment_distance(p, p + right, p + left) <= reach {
            arena.push(Node {
                tri: t0,
                edge: (k0 + 1) % 3,
                offset: Complex64::new(0.0, 0.0),
                right,
                left,
                parent: usize::MAX,
                crossed: None,
            });
            queue.push_back(0usize);
        }
        while let Some(idx) = queue.pop_front() {
            if arena.len() > budget {
                return Err(Error::BudgetExceeded { limit: budget });
            }
            let (tri, edge, offset, right, left) = {
                let n = &arena[idx];
                (n.tri, n.edge, n.offset, n.right, n.left)
            };
            let adj = tris[tri].nbr[edge];
            // Edge `edge` of `tri` runs A -> B; the neighbour runs it B -> A.
            let a_dev = self.vertex(tri, edge) + offset;
            let t2 = adj.tri;
            let k2 = adj.edge;
            let offset2 = a_dev - self.vertex(t2, k2 + 1);
            let crossed = adj.glued;
            let w = self.vertex(t2, k2 + 2) + offset2;
            let b_dev = self.vertex(t2, k2) + offset2;
            let d = w - p;
            // A vertex on a wedge ray sits behind the cone point defining that ray.
            let right_of_left = cross(d, left) > ANGLE_TOL * d.norm() * left.norm();
            let left_of_right = cross(right, d) > ANGLE_TOL * d.norm() * right.norm();
            let push = |arena: &mut Vec<Node>,
                            queue: &mut VecDeque<usize>,
                            e: usize,
                            r: Complex64,
                            l: Complex64,
                            ea: Complex64,
                            eb: Complex64| {
                if segment_distance(p, ea, eb) <= reach {
                    arena.push(Node {
                        tri: t2,
                        edge: e,
                        offset: offset2,
                        right: r,
                        left: l,
                        parent: idx,
                        crossed,
                    });
                    queue.push_back(arena.len() - 1);
                }
            };
            if right_of_left && left_of_right {
                if within(d) {
                    arena.push(Node {
                        tri: t2,
                        edge: usize::MAX,
                        offset: offset2,
                        right: d,
                        left: d,
                        parent: idx,
                        crossed,
                    });
                    found.push(Found {
                        v: d,
                        node: arena.len() - 1,
                    });
                }
                // A -> W is edge k2+1, W -> B is edge k2+2 of the neighbour.
                push(&mut arena, &mut queue, (k2 + 1) % 3, right, d, a_dev, w);
                push(&mut arena, &mut queue, (k2 + 2) % 3, d, left, w, b_dev);
            } else if !right_of_left {
                push(&mut arena, &mut queue, (k2 + 1) % 3, right, left, a_dev, w);
            } else {
                push(&mut arena, &mut queue, (k2 + 2) % 3, right, left, w, b_dev);
            }
        }
        let out = found
            .into_iter()
            .map(|f| {
                let mut path = Vec::new();
                let mut cur = f.node;
                while cur != usize::MAX {
                    if let Some(e) = arena[cur].crossed {
                        path.push(e);
                    }
                    cur = arena[cur].parent;
                }
                path.reverse();
                SaddleConnection {
                    holonomy: f.v,
                    start,
                    path,
                }
            })
            .collect();
        Ok((out, arena.len()))
    }

    /// Shortest saddle connection in the max-norm, by unfolding.
    pub fn systole(&self) -> Result<f64> {
        self.systole_with(SystoleNorm::Max, SystoleMethod::Unfolding)
    }

    pub fn euclidean_systole(&self) -> Result<f64> {
        self.systole_with(SystoleNorm::Euclidean, SystoleMethod::Unfolding)
    }

    pub fn systole_with(&self, norm: SystoleNorm, method: SystoleMethod) -> Result<f64> {
        if method == SystoleMethod::Auto {
            if let Some(l) = self.lattice() {
                return Ok(lattice_systole(&l, norm));
            }
        }
        self.systole_unfolding(norm, SaddleSearch::default())
    }

    /// Adaptive doubling: the search radius starts small and grows to the
    /// shortest polygon edge, which is itself a saddle connection.
    pub fn systole_unfolding(&self, norm: SystoleNorm, opts: SaddleSearch) -> Result<f64> {
        let cap = self
            .edge_vectors()
            .into_iter()
            .map(|v| norm.of(v))
            .fold(f64::INFINITY, f64::min);
        let mut bound = cap / 16.0;
        loop {
            // A connection of norm ≤ bound in either norm has max-norm ≤ bound.
            let found = self.saddle_connections_with(bound, opts)?;
            let best = found
                .iter()
                .map(|s| norm.of(s.holonomy))
                .fold(f64::INFINITY, f64::min);
            if best <= bound * (1.0 + 1e-12) {
                return Ok(best);
            }
            if bound >= cap {
                return Ok(cap);
            }
            bound = (bound * 2.0).min(cap);
        }
    }

    /// `ℓ(x) ≥ ε`.
    pub fn in_compact_set(&self, epsilon: f64) -> Result<bool> {
        Ok(self.systole()? >= epsilon)
    }
}

pub(crate) fn lattice_systole(l: &Lattice2, norm: SystoleNorm) -> f64 {
    match norm {
        SystoleNorm::Max => l.shortest_max_norm(),
        SystoleNorm::Euclidean => l.shortest_euclidean(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{double_pentagon, regular_octagon, square_torus, SL2Matrix};

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    fn holonomies(x: &TranslationSurface, bound: f64) -> Vec<Complex64> {
        x.saddle_connections(bound)
            .unwrap()
            .into_iter()
            .map(|s| s.holonomy)
            .collect()
    }

    #[test]
    fn square_torus_unit_ball() {
        let h = holonomies(&square_torus(), 1.0);
        assert_eq!(h.len(), 4);
        for want in [c(1., 0.), c(0., 1.), c(1., 1.), c(1., -1.)] {
            assert!(h.iter().any(|z| (z - want).norm() < 1e-12), "missing {want}");
        }
        assert!(holonomies(&square_torus(), 0.5).is_empty());
    }

    #[test]
    fn square_torus_matches_lattice_count() {
        let x = square_torus();
        let l = x.lattice().unwrap();
        for bound in [2.0, 3.5, 6.0] {
            let h = holonomies(&x, bound);
            assert_eq!(h.len(), l.primitive_vectors(bound).len(), "bound {bound}");
        }
    }

    #[test]
    fn octagon_side_directions() {
        let x = regular_octagon();
        let side = x.edge(0, 0).norm();
        let h = holonomies(&x, side);
        for k in 0..4 {
            let v = canonical(x.edge(0, k));
            assert!(h.iter().any(|z| (z - v).norm() < 1e-9), "side {k} missing");
        }
    }

    #[test]
    fn refinement_only_adds() {
        let x = double_pentagon();
        let small = holonomies(&x, 0.8);
        let large = holonomies(&x, 1.3);
        assert!(small.len() < large.len());
        for z in small {
            assert!(large.iter().any(|w| (w - z).norm() < 1e-9));
        }
    }

    #[test]
    fn holonomies_transform_linearly() {
        let x = regular_octagon();
        let m = SL2Matrix::geodesic(0.4) * SL2Matrix::horocycle(0.7);
        let y = x.act(&m).unwrap();
        let hx = holonomies(&x, 1.0);
        let hy = holonomies(&y, 6.0);
        for z in hx {
            let mz = canonical(m.apply(z));
            if mz.re.abs().max(mz.im.abs()) < 5.9 {
                assert!(hy.iter().any(|w| (w - mz).norm() < 1e-9), "{mz} missing");
            }
        }
    }

    #[test]
    fn systole_values() {
        assert!((square_torus().systole().unwrap() - 1.0).abs() < 1e-12);
        let y = square_torus().act(&SL2Matrix::geodesic(1.0)).unwrap();
        assert!((y.systole().unwrap() - (-1f64).exp()).abs() < 1e-12);
        let oct = regular_octagon();
        let side = oct.edge(0, 0).norm();
        let sys = oct.systole().unwrap();
        assert!(sys <= side / std::f64::consts::SQRT_2 + 1e-12);
        assert!(sys > 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let opts = SaddleSearch {
            budget: 10,
            parallel: false,
        };
        let r = regular_octagon().saddle_connections_with(5.0, opts);
        assert!(matches!(r, Err(Error::BudgetExceeded { limit: 10 })));
    }

    #[test]
    fn paths_record_crossed_edges() {
        let found = square_torus().saddle_connections(2.0).unwrap();
        let long = found
            .iter()
            .find(|s| (s.holonomy - c(2., 1.)).norm() < 1e-12)
            .unwrap();
        assert!(!long.path.is_empty());
    }
}
