//! Translation surfaces presented as planar polygons with edges glued by
//! translations, and the linear `SL(2,R)` action on them.
//!
//! Every polygon vertex is treated as a marked point, so saddle connections on
//! a torus are the primitive vectors of its period lattice.

mod builtin;
mod height;
mod lattice;
mod matrix;
mod saddle;
pub(crate) mod triangulation;

pub use builtin::{builtin, double_pentagon, regular_octagon, square_torus, BUILTIN_NAMES};
pub use height::{
    CircleAverageReport, HeightFunction, HeightParams, HorocycleAverageReport, HorocycleMode,
    QuadratureOptions,
};
pub use lattice::Lattice2;
pub(crate) use height::clamp_systole;
pub use matrix::{make_matrix, MatrixKind, SL2Matrix};
pub use saddle::{
    default_budget, SaddleConnection, SaddleSearch, SystoleMethod, SystoleNorm, BUDGET_ENV,
};

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use triangulation::Triangle;

const GLUE_TOL: f64 = 1e-9;

/// A vertex class with its total cone angle `2π · angle_multiple`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConePoint {
    /// Polygon corners `(polygon, vertex)` identified to this point.
    pub corners: Vec<(usize, usize)>,
    pub angle_multiple: usize,
    /// Zero order `α = angle_multiple − 1`.
    pub order: usize,
}

#[derive(Debug)]
struct Topology {
    partner: Vec<Vec<(usize, usize)>>,
    triangles: Vec<Triangle>,
    cone_points: Vec<ConePoint>,
    genus: usize,
}

#[derive(Clone, Debug)]
pub struct TranslationSurface {
    polygons: Vec<Vec<Complex64>>,
    topo: Arc<Topology>,
    normalized: bool,
}

/// Edge pair `((p, e), (p', e'))`.
pub type Gluing = ((usize, usize), (usize, usize));

impl TranslationSurface {
    /// Builds a surface from counter-clockwise polygons and edge pairs
    /// `((p, e), (p', e'))`; edge `e` of polygon `p` runs from vertex `e` to `e + 1`.
    pub fn new(
        polygons: Vec<Vec<Complex64>>,
        gluings: &[Gluing],
    ) -> Result<Self> {
        if polygons.is_empty() {
            return Err(Error::InvalidSurface("no polygons".into()));
        }
        for (p, poly) in polygons.iter().enumerate() {
            if poly.len() < 3 {
                return Err(Error::InvalidSurface(format!("polygon {p} has < 3 vertices")));
            }
            if poly.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidSurface(format!("polygon {p} has non-finite vertex")));
            }
            if triangulation::signed_area(poly) <= 0.0 {
                return Err(Error::InvalidSurface(format!(
                    "polygon {p} is not counter-clockwise"
                )));
            }
        }
        let mut partner: Vec<Vec<Option<(usize, usize)>>> =
            polygons.iter().map(|p| vec![None; p.len()]).collect();
        for &(x, y) in gluings {
            for &(p, e) in &[x, y] {
                if p >= polygons.len() || e >= polygons[p].len() {
                    return Err(Error::InvalidSurface(format!("edge ({p},{e}) does not exist")));
                }
            }
            if x == y {
                return Err(Error::InvalidSurface(format!("edge {x:?} glued to itself")));
            }
            for (a, b) in [(x, y), (y, x)] {
                if partner[a.0][a.1].is_some() {
                    return Err(Error::InvalidSurface(format!("edge {a:?} glued twice")));
                }
                partner[a.0][a.1] = Some(b);
            }
        }
        let partner: Vec<Vec<(usize, usize)>> = partner
            .into_iter()
            .enumerate()
            .map(|(p, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(e, q)| {
                        q.ok_or_else(|| Error::InvalidSurface(format!("edge ({p},{e}) unglued")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for (p, row) in partner.iter().enumerate() {
            for (e, &(p2, e2)) in row.iter().enumerate() {
                let v = edge_vector(&polygons[p], e);
                let w = edge_vector(&polygons[p2], e2);
                if (v + w).norm() > GLUE_TOL * v.norm().max(w.norm()) {
                    return Err(Error::InvalidSurface(format!(
                        "edges ({p},{e}) and ({p2},{e2}) are not opposite translates"
                    )));
                }
            }
        }
        let cone_points = cone_points(&polygons, &partner)?;
        let chi_defect: usize = cone_points.iter().map(|c| c.order).sum();
        if chi_defect % 2 != 0 {
            return Err(Error::InvalidSurface(format!(
                "total zero order {chi_defect} is odd"
            )));
        }
        let genus = (chi_defect + 2) / 2;
        let triangles = triangulation::build(&polygons, &partner)?;
        Ok(Self {
            polygons,
            topo: Arc::new(Topology {
                partner,
                triangles,
                cone_points,
                genus,
            }),
            normalized: false,
        })
    }

    pub fn polygons(&self) -> &[Vec<Complex64>] {
        &self.polygons
    }

    /// Partner `(p', e')` of edge `(p, e)`.
    pub fn partner(&self, p: usize, e: usize) -> (usize, usize) {
        self.topo.partner[p][e]
    }

    pub fn gluing_pairs(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut out = Vec::new();
        for (p, row) in self.topo.partner.iter().enumerate() {
            for (e, &q) in row.iter().enumerate() {
                if (p, e) < q {
                    out.push(((p, e), q));
                }
            }
        }
        out
    }

    pub fn edge(&self, p: usize, e: usize) -> Complex64 {
        edge_vector(&self.polygons[p], e)
    }

    pub fn cone_points(&self) -> &[ConePoint] {
        &self.topo.cone_points
    }

    pub fn genus(&self) -> usize {
        self.topo.genus
    }

    /// Sorted zero orders of the points with cone angle above `2π`.
    pub fn stratum(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .topo
            .cone_points
            .iter()
            .map(|c| c.order)
            .filter(|&o| o > 0)
            .collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    pub fn area(&self) -> f64 {
        self.polygons.iter().map(|p| triangulation::signed_area(p)).sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Rescales to area one and flags the result as normalized.
    pub fn normalize_area(&self) -> Self {
        let k = 1.0 / self.area().sqrt();
        Self {
            polygons: self
                .polygons
                .iter()
                .map(|p| p.iter().map(|z| z * k).collect())
                .collect(),
            topo: self.topo.clone(),
            normalized: true,
        }
    }

    pub(crate) fn triangles(&self) -> &[Triangle] {
        &self.topo.triangles
    }

    /// Applies `m` to every vertex; the gluing combinatorics are shared.
    pub fn act(&self, m: &SL2Matrix) -> Result<Self> {
        if !((m.det() - 1.0).abs() <= 1e-9) {
            return Err(Error::Precondition(format!(
                "matrix determinant {} is not 1",
                m.det()
            )));
        }
        let polygons: Vec<Vec<Complex64>> = self
            .polygons
            .iter()
            .map(|p| p.iter().map(|&z| m.apply(z)).collect())
            .collect();
        let out = Self {
            polygons,
            topo: self.topo.clone(),
            normalized: self.normalized,
        };
        let total = out.area();
        for (p, poly) in out.polygons.iter().enumerate() {
            let a = triangulation::signed_area(poly);
            if !a.is_finite() || a < 1e-15 * total {
                return Err(Error::DegenerateGeometry(format!(
                    "polygon {p} has area {a:e} after the action"
                )));
            }
        }
        for (k, t) in out.topo.triangles.iter().enumerate() {
            let poly = &out.polygons[t.poly];
            let a = triangulation::signed_area(&[poly[t.v[0]], poly[t.v[1]], poly[t.v[2]]]);
            if !(a > 0.0) {
                return Err(Error::DegenerateGeometry(format!(
                    "triangle {k} collapsed after the action"
                )));
            }
        }
        Ok(out)
    }

    /// Holonomies of all polygon edges.
    pub fn edge_vectors(&self) -> Vec<Complex64> {
        self.polygons
            .iter()
            .flat_map(|p| (0..p.len()).map(move |e| edge_vector(p, e)))
            .collect()
    }

    /// Period lattice when the surface is a torus with a single marked point.
    pub fn lattice(&self) -> Option<Lattice2> {
        if self.topo.genus != 1 || self.topo.cone_points.len() != 1 {
            return None;
        }
        Lattice2::from_generators(&self.edge_vectors())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn edge_vector(poly: &[Complex64], e: usize) -> Complex64 {
    poly[(e + 1) % poly.len()] - poly[e]
}

fn interior_angle(poly: &[Complex64], k: usize) -> f64 {
    let n = poly.len();
    let incoming = poly[k] - poly[(k + n - 1) % n];
    let outgoing = poly[(k + 1) % n] - poly[k];
    // Turning angle in (-π, π); interior = π − turn.
    let turn = triangulation::cross(incoming, outgoing).atan2(incoming.re * outgoing.re + incoming.im * outgoing.im);
    PI - turn
}

/// Groups corners into vertex classes by walking around each vertex.
///
/// At corner `(p, k)` the outgoing edge `k` is glued to `(p', e')`, whose end
/// vertex `e' + 1` is the same point of the surface.
fn cone_points(
    polygons: &[Vec<Complex64>],
    partner: &[Vec<(usize, usize)>],
) -> Result<Vec<ConePoint>> {
    let mut seen: Vec<Vec<bool>> = polygons.iter().map(|p| vec![false; p.len()]).collect();
    let mut out = Vec::new();
    for p0 in 0..polygons.len() {
        for k0 in 0..polygons[p0].len() {
            if seen[p0][k0] {
                continue;
            }
            let mut corners = Vec::new();
            let mut angle = 0.0;
            let (mut p, mut k) = (p0, k0);
            loop {
                if seen[p][k] {
                    if (p, k) == (p0, k0) {
                        break;
                    }
                    return Err(Error::InvalidSurface("inconsistent vertex cycle".into()));
                }
                seen[p][k] = true;
                corners.push((p, k));
                angle += interior_angle(&polygons[p], k);
                let (p2, e2) = partner[p][k];
                p = p2;
                k = (e2 + 1) % polygons[p2].len();
            }
            let multiple = angle / (2.0 * PI);
            let rounded = multiple.round();
            if rounded < 1.0 || (multiple - rounded).abs() > 1e-6 {
                return Err(Error::InvalidSurface(format!(
                    "cone angle {angle} at corner ({p0},{k0}) is not a positive multiple of 2π"
                )));
            }
            let angle_multiple = rounded as usize;
            out.push(ConePoint {
                corners,
                angle_multiple,
                order: angle_multiple - 1,
            });
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceJson {
    polygons: Vec<Vec<[f64; 2]>>,
    gluings: Vec<[[usize; 2]; 2]>,
}

impl Serialize for TranslationSurface {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SurfaceJson {
            polygons: self
                .polygons
                .iter()
                .map(|p| p.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            gluings: self
                .gluing_pairs()
                .into_iter()
                .map(|(a, b)| [[a.0, a.1], [b.0, b.1]])
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TranslationSurface {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SurfaceJson::deserialize(d)?;
        let polygons = raw
            .polygons
            .into_iter()
            .map(|p| p.into_iter().map(|[x, y]| Complex64::new(x, y)).collect())
            .collect();
        let gluings: Vec<_> = raw
            .gluings
            .into_iter()
            .map(|[a, b]| ((a[0], a[1]), (b[0], b[1])))
            .collect();
        TranslationSurface::new(polygons, &gluings).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_torus_data() {
        let x = square_torus();
        assert_eq!(x.genus(), 1);
        assert_eq!(x.cone_points().len(), 1);
        assert_eq!(x.cone_points()[0].angle_multiple, 1);
        assert!(x.stratum().is_empty());
        assert!((x.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn octagon_and_pentagon_are_genus_two() {
        for x in [regular_octagon(), double_pentagon()] {
            assert_eq!(x.genus(), 2);
            assert_eq!(x.cone_points().len(), 1);
            assert_eq!(x.cone_points()[0].angle_multiple, 3);
            assert_eq!(x.stratum(), vec![2]);
            assert!((x.area() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn act_preserves_area_and_combinatorics() {
        let x = regular_octagon();
        let m = SL2Matrix::geodesic(0.8) * SL2Matrix::horocycle(0.3) * SL2Matrix::rotation(1.1);
        let y = x.act(&m).unwrap();
        assert!(((y.area() - x.area()) / x.area()).abs() < 1e-9);
        assert_eq!(y.gluing_pairs(), x.gluing_pairs());
        assert_eq!(y.genus(), 2);
        let z = x.act(&SL2Matrix::IDENTITY).unwrap();
        assert_eq!(z.polygons(), x.polygons());
    }

    #[test]
    fn geodesic_image_of_square_is_rectangle() {
        let y = square_torus().act(&SL2Matrix::geodesic(1.0)).unwrap();
        let e = std::f64::consts::E;
        assert!((y.edge(0, 0) - Complex64::new(e, 0.0)).norm() < 1e-12);
        assert!((y.edge(0, 1) - Complex64::new(0.0, 1.0 / e)).norm() < 1e-12);
    }

    #[test]
    fn extreme_action_is_degenerate() {
        // Two vertices merge numerically under a huge shear.
        let r = square_torus().act(&SL2Matrix::horocycle(1e20));
        assert!(matches!(r, Err(Error::DegenerateGeometry(_))));
        let r = square_torus().act(&SL2Matrix::geodesic(800.0));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn rejects_bad_gluings() {
        let sq = vec![
            Complex64::new(0., 0.),
            Complex64::new(1., 0.),
            Complex64::new(1., 1.),
            Complex64::new(0., 1.),
        ];
        // Adjacent sides are not opposite translates.
        assert!(TranslationSurface::new(vec![sq.clone()], &[((0, 0), (0, 1)), ((0, 2), (0, 3))]).is_err());
        assert!(TranslationSurface::new(vec![sq.clone()], &[((0, 0), (0, 2))]).is_err());
        let cw: Vec<_> = sq.iter().rev().copied().collect();
        assert!(TranslationSurface::new(vec![cw], &[((0, 0), (0, 2)), ((0, 1), (0, 3))]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let x = double_pentagon();
        let s = x.to_json_string().unwrap();
        let y = TranslationSurface::from_json_str(&s).unwrap();
        assert_eq!(y.polygons(), x.polygons());
        assert_eq!(y.gluing_pairs(), x.gluing_pairs());
        let square = r#"{"polygons":[[[0,0],[1,0],[1,1],[0,1]]],"gluings":[[[0,0],[0,2]],[[0,1],[0,3]]]}"#;
        assert_eq!(TranslationSurface::from_json_str(square).unwrap().genus(), 1);
    }
}
