//! Ear-clipping triangulation of the polygons and the adjacency of the resulting
//! triangles across diagonals and glued edges.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Neighbour across one triangle edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Adjacent {
    pub tri: usize,
    pub edge: usize,
    /// Set when the edge is an original polygon edge `(polygon, edge)`.
    pub glued: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub(crate) struct Triangle {
    pub poly: usize,
    /// Polygon vertex indices in counter-clockwise order.
    pub v: [usize; 3],
    /// Neighbour across edge `k`, which runs from `v[k]` to `v[k+1]`.
    pub nbr: [Adjacent; 3],
}

pub(crate) fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

pub(crate) fn signed_area(poly: &[Complex64]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| cross(poly[i], poly[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Closed-triangle containment with a relative tolerance.
fn in_closed_triangle(p: Complex64, a: Complex64, b: Complex64, c: Complex64, tol: f64) -> bool {
    cross(b - a, p - a) >= -tol && cross(c - b, p - b) >= -tol && cross(a - c, p - c) >= -tol
}

/// Triangulates one counter-clockwise simple polygon into vertex-index triples.
pub(crate) fn ear_clip(poly: &[Complex64]) -> Result<Vec<[usize; 3]>> {
    let n = poly.len();
    let scale = poly.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-12 * scale * scale;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n.saturating_sub(2));
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (ip, ic, inx) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (poly[ip], poly[ic], poly[inx]);
            if cross(b - a, c - b) <= tol {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                j != ip && j != ic && j != inx && in_closed_triangle(poly[j], a, b, c, tol)
            });
            if !blocked {
                out.push([ip, ic, inx]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(Error::InvalidSurface(
                "polygon could not be triangulated (not simple?)".into(),
            ));
        }
    }
    let (a, b, c) = (poly[idx[0]], poly[idx[1]], poly[idx[2]]);
    if cross(b - a, c - b) <= tol {
        return Err(Error::InvalidSurface("degenerate final triangle".into()));
    }
    out.push([idx[0], idx[1], idx[2]]);
    Ok(out)
}

/// Triangulates every polygon and links triangles across diagonals and gluings.
pub(crate) fn build(
    polygons: &[Vec<Complex64>],
    partner: &[Vec<(usize, usize)>],
) -> Result<Vec<Triangle>> {
    let placeholder = Adjacent {
        tri: usize::MAX,
        edge: 0,
        glued: None,
    };
    let mut tris = Vec::new();
    // (poly, edge) of an original polygon edge -> (triangle, triangle edge)
    let mut owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (p, poly) in polygons.iter().enumerate() {
        let n = poly.len();
        let mut diag: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for v in ear_clip(poly)? {
            let t = tris.len();
            let mut tri = Triangle {
                poly: p,
                v,
                nbr: [placeholder; 3],
            };
            for k in 0..3 {
                let (i, j) = (v[k], v[(k + 1) % 3]);
                if j == (i + 1) % n {
                    owner.insert((p, i), (t, k));
                } else {
                    let key = (i.min(j), i.max(j));
                    if let Some(&(t2, k2)) = diag.get(&key) {
                        tri.nbr[k] = Adjacent {
                            tri: t2,
                            edge: k2,
                            glued: None,
                        };
                        let other: &mut Triangle = &mut tris[t2];
                        other.nbr[k2] = Adjacent {
                            tri: t,
                            edge: k,
                            glued: None,
                        };
                    } else {
                        diag.insert(key, (t, k));
                    }
                }
            }
            tris.push(tri);
        }
    }
    for (&(p, e), &(t, k)) in &owner {
        let (p2, e2) = partner[p][e];
        let &(t2, k2) = owner
            .get(&(p2, e2))
            .ok_or_else(|| Error::InvalidSurface("glued edge missing from triangulation".into()))?;
        tris[t].nbr[k] = Adjacent {
            tri: t2,
            edge: k2,
            glued: Some((p, e)),
        };
    }
    if tris.iter().any(|t| t.nbr.iter().any(|a| a.tri == usize::MAX)) {
        return Err(Error::InvalidSurface("triangulation left an unmatched edge".into()));
    }
    Ok(tris)
}
