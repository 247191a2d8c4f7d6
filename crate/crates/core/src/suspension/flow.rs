//! Vertical straight-line flow through the polygon complex and the empirical
//! first-return map to a transversal.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::TranslationSurface;

const SNAP: f64 = 1e-12;
const CONE_TOL: f64 = 1e-10;
const MAX_CROSSINGS: usize = 1_000_000;

/// A segment inside one polygon, not vertical; points on it are parametrized by
/// their real offset from `start`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transversal {
    pub polygon: usize,
    pub start: [f64; 2],
    pub end: [f64; 2],
}

impl Transversal {
    pub fn new(polygon: usize, start: Complex64, end: Complex64) -> Self {
        Self {
            polygon,
            start: [start.re, start.im],
            end: [end.re, end.im],
        }
    }

    fn start_c(&self) -> Complex64 {
        Complex64::new(self.start[0], self.start[1])
    }

    fn end_c(&self) -> Complex64 {
        Complex64::new(self.end[0], self.end[1])
    }

    pub fn width(&self) -> f64 {
        self.end[0] - self.start[0]
    }

    /// Point with real offset `param` from the start.
    pub fn point(&self, param: f64) -> Complex64 {
        let (s, e) = (self.start_c(), self.end_c());
        s + (e - s) * (param / self.width())
    }
}

/// One traced sample of the return map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReturnSample {
    pub param: f64,
    pub image: f64,
    pub return_time: f64,
}

impl ReturnSample {
    pub fn translation(&self) -> f64 {
        self.image - self.param
    }
}

/// Maximal run of consecutive samples sharing one translation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub translation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalIet {
    pub width: f64,
    pub samples: Vec<ReturnSample>,
    pub pieces: Vec<Piece>,
    /// Start of the transversal plus the first hits of downward separatrices.
    pub breakpoints: Vec<f64>,
    pub retries: usize,
}

impl EmpiricalIet {
    /// Piecewise-translation value at `param` from the fitted table.
    pub fn evaluate(&self, param: f64) -> Option<f64> {
        let k = self.breakpoints.partition_point(|&b| b <= param);
        if k == 0 {
            return None;
        }
        let (lo, hi) = (
            self.breakpoints[k - 1],
            self.breakpoints.get(k).copied().unwrap_or(self.width),
        );
        self.samples
            .iter()
            .find(|s| s.param >= lo && s.param < hi)
            .map(|s| param + s.translation())
    }
}

enum Stop {
    Transversal { param: f64, point: Complex64 },
    Edge { edge: usize, point: Complex64 },
}

struct Tracer<'a> {
    x: &'a TranslationSurface,
    tol: f64,
    cone_tol: f64,
}

impl<'a> Tracer<'a> {
    fn new(x: &'a TranslationSurface) -> Self {
        let scale = x
            .polygons()
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(1e-300, f64::max);
        Self {
            x,
            tol: SNAP * scale,
            cone_tol: CONE_TOL * scale,
        }
    }

    /// Next stop of the vertical ray from `q` in polygon `p`; `dir` is `+1` up, `-1` down.
    fn step(&self, p: usize, q: Complex64, dir: f64, tr: &Transversal) -> Result<(Stop, f64)> {
        let poly = &self.x.polygons()[p];
        let n = poly.len();
        let mut best: Option<(f64, Stop)> = None;
        for e in 0..n {
            let (a, b) = (poly[e], poly[(e + 1) % n]);
            let dx = b.re - a.re;
            if dx.abs() <= self.tol {
                continue;
            }
            let u = (q.re - a.re) / dx;
            if !(-SNAP..=1.0 + SNAP).contains(&u) {
                continue;
            }
            let u = u.clamp(0.0, 1.0);
            let y = a.im + u * (b.im - a.im);
            let dy = (y - q.im) * dir;
            if dy > self.tol && best.as_ref().is_none_or(|(d, _)| dy < *d) {
                best = Some((dy, Stop::Edge {
                    edge: e,
                    point: Complex64::new(q.re, y),
                }));
            }
        }
        if p == tr.polygon {
            let (s, e) = (tr.start_c(), tr.end_c());
            let u = (q.re - s.re) / (e.re - s.re);
            if (0.0..1.0).contains(&u) {
                let y = s.im + u * (e.im - s.im);
                let dy = (y - q.im) * dir;
                if dy > self.tol && best.as_ref().is_none_or(|(d, _)| dy <= *d) {
                    best = Some((dy, Stop::Transversal {
                        param: q.re - s.re,
                        point: Complex64::new(q.re, y),
                    }));
                }
            }
        }
        let (dy, stop) = best.ok_or_else(|| {
            Error::InvalidSurface(format!("vertical ray from {q} escapes polygon {p}"))
        })?;
        let hit = match &stop {
            Stop::Edge { point, .. } | Stop::Transversal { point, .. } => *point,
        };
        if let Some(v) = poly.iter().find(|v| (*v - hit).norm() < self.cone_tol) {
            return Err(Error::SingularTrajectory { x: v.re, y: v.im });
        }
        Ok((stop, dy))
    }

    /// Follows the vertical flow from `q` in polygon `p` until it meets the transversal.
    fn run(&self, mut p: usize, mut q: Complex64, dir: f64, tr: &Transversal) -> Result<(f64, f64)> {
        let mut time = 0.0;
        for _ in 0..MAX_CROSSINGS {
            let (stop, dy) = self.step(p, q, dir, tr)?;
            time += dy;
            match stop {
                Stop::Transversal { param, .. } => return Ok((param, time)),
                Stop::Edge { edge, point } => {
                    let a = self.x.polygons()[p][edge];
                    let (p2, e2) = self.x.partner(p, edge);
                    let poly2 = &self.x.polygons()[p2];
                    let b2 = poly2[(e2 + 1) % poly2.len()];
                    q = point + (b2 - a);
                    p = p2;
                }
            }
        }
        Err(Error::BudgetExceeded {
            limit: MAX_CROSSINGS,
        })
    }
}

/// Traces the upward flow from the transversal point at `param` to its first return.
pub fn trace_first_return(
    x: &TranslationSurface,
    transversal: &Transversal,
    param: f64,
) -> Result<ReturnSample> {
    if transversal.polygon >= x.polygons().len() || transversal.width() <= 0.0 {
        return Err(Error::Precondition(
            "transversal must lie in an existing polygon and run left to right".into(),
        ));
    }
    let tracer = Tracer::new(x);
    let q = transversal.point(param);
    let (image, return_time) = tracer.run(transversal.polygon, q, 1.0, transversal)?;
    Ok(ReturnSample {
        param,
        image,
        return_time,
    })
}

/// Downward separatrices: corners whose interior angle contains the direction `-i`.
fn downward_corners(x: &TranslationSurface) -> Vec<(usize, Complex64)> {
    let mut out = Vec::new();
    for (p, poly) in x.polygons().iter().enumerate() {
        let n = poly.len();
        for k in 0..n {
            let v = poly[k];
            let out_dir = poly[(k + 1) % n] - v;
            let back_dir = poly[(k + n - 1) % n] - v;
            let base = out_dir.arg();
            let rel = |z: Complex64| (z.arg() - base).rem_euclid(TAU);
            let down = rel(Complex64::new(0.0, -1.0));
            if down > 1e-12 && down < rel(back_dir) - 1e-12 {
                out.push((p, v));
            }
        }
    }
    out
}

/// First hits of the downward separatrices on the transversal, sorted.
pub fn separatrix_breakpoints(x: &TranslationSurface, transversal: &Transversal) -> Vec<f64> {
    let tracer = Tracer::new(x);
    let mut hits: Vec<f64> = downward_corners(x)
        .into_iter()
        .filter_map(|(p, v)| tracer.run(p, v, -1.0, transversal).ok().map(|(param, _)| param))
        .collect();
    hits.sort_by(f64::total_cmp);
    hits
}

/// Samples the return map at `samples` stratified points, nudging any that hit a
/// cone point, and fits a piecewise-translation table.
pub fn first_return_oracle(
    x: &TranslationSurface,
    transversal: &Transversal,
    samples: usize,
) -> Result<EmpiricalIet> {
    if samples == 0 {
        return Err(Error::Precondition("samples must be ≥ 1".into()));
    }
    let width = transversal.width();
    let nudge = 1e-7 * width * 0.618_033_988_749_895;
    let traced: Vec<Result<(ReturnSample, usize)>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let base = (k as f64 + 0.5) / samples as f64 * width;
            let mut last = None;
            for retry in 0..4 {
                let param = base + retry as f64 * nudge;
                match trace_first_return(x, transversal, param) {
                    Ok(s) => return Ok((s, retry)),
                    Err(e @ Error::SingularTrajectory { .. }) => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(last.expect("at least one attempt"))
        })
        .collect();
    let mut out = Vec::with_capacity(samples);
    let mut retries = 0;
    for r in traced {
        let (s, k) = r?;
        retries += k;
        out.push(s);
    }
    let mut pieces: Vec<Piece> = Vec::new();
    for s in &out {
        match pieces.last_mut() {
            Some(pc) if (pc.translation - s.translation()).abs() <= 1e-9 * width.max(1.0) => {
                pc.end = s.param;
            }
            _ => pieces.push(Piece {
                start: s.param,
                end: s.param,
                translation: s.translation(),
            }),
        }
    }
    let mut breakpoints = vec![0.0];
    breakpoints.extend(
        separatrix_breakpoints(x, transversal)
            .into_iter()
            .filter(|&b| b > 1e-12 * width),
    );
    Ok(EmpiricalIet {
        width,
        samples: out,
        pieces,
        breakpoints,
        retries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::square_torus;

    fn mid_transversal() -> Transversal {
        Transversal::new(0, Complex64::new(0.0, 0.5), Complex64::new(1.0, 0.5))
    }

    #[test]
    fn square_torus_returns_identically() {
        let x = square_torus();
        let emp = first_return_oracle(&x, &mid_transversal(), 200).unwrap();
        assert_eq!(emp.pieces.len(), 1);
        assert!(emp.pieces[0].translation.abs() < 1e-12);
        for s in &emp.samples {
            assert!((s.return_time - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn starting_below_a_vertex_is_singular() {
        let x = square_torus();
        let tr = Transversal::new(0, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        // The vertical through x = 0 runs along a glued edge; x = 1e-13 hits the corner.
        let r = trace_first_return(&x, &tr, 1e-13);
        assert!(matches!(r, Err(Error::SingularTrajectory { .. })));
    }
}
