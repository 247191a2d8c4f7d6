//! Non-recurrent directions: the sets `Z` of directions whose orbit samples
//! `g_{lt} h_s x`, `l = 1..N`, spend too little time in `K_ε = {ℓ ≥ ε}`.
//!
//! Besides the sampled masks there is an exact construction for one-point
//! tori: `g_{lt} h_s x ∉ K_ε` iff some lattice vector `(a, b)` has `|b| < εe^{lt}`
//! and `|s + a/b| < εe^{-lt}/|b|`, so each excursion set is a finite union of
//! intervals around the slopes `-a/b`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{BadSetMask, DirectionGrid, MaskKind};
use super::observable::Orbit;
use crate::error::{Error, Result};
use crate::surface::{Lattice2, SL2Matrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    /// Base points `h_s x`.
    #[default]
    Horocycle,
    /// Base points `r_θ x` with `θ = s` radians.
    Rotation,
}

impl FlowMode {
    pub fn base(&self, s: f64) -> SL2Matrix {
        match self {
            FlowMode::Horocycle => SL2Matrix::horocycle(s),
            FlowMode::Rotation => SL2Matrix::rotation(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceParams {
    /// Compact set `K_ε`.
    pub eps: f64,
    /// Number of samples `l = 1..N`.
    pub n: usize,
    /// Time step between samples.
    pub t: f64,
    pub delta: f64,
    #[serde(default)]
    pub mode: FlowMode,
}

impl RecurrenceParams {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::Precondition(format!("δ = {} must lie in [0, 1]", self.delta)));
        }
        if self.n == 0 || !(self.t > 0.0) || !(self.eps > 0.0) {
            return Err(Error::Precondition("need N ≥ 1, t > 0 and ε > 0".into()));
        }
        Ok(())
    }

    /// Strict convention: bad iff the fraction of samples in `K_ε` is `< 1 − δ`.
    pub fn is_bad(&self, hits: usize) -> bool {
        let n = self.n as f64;
        (hits as f64) < (1.0 - self.delta) * n - 1e-12 * n
    }
}

/// Number of `l ∈ 1..=N` with `g_{lt} B(s) x ∈ K_ε`.
pub fn recurrence_hits(orbit: &Orbit, s: f64, p: &RecurrenceParams) -> Result<usize> {
    let ray = orbit.ray(&p.mode.base(s), p.t * p.n as f64)?;
    let mut hits = 0;
    for l in 1..=p.n {
        if ray.in_compact_set(p.t * l as f64, p.eps)? {
            hits += 1;
        }
    }
    Ok(hits)
}

/// Z-mask on `grid`, one sample at each interval centre.
pub fn recurrence_mask(orbit: &Orbit, grid: &DirectionGrid, p: &RecurrenceParams) -> Result<BadSetMask> {
    p.validate()?;
    let bits = grid
        .centers()
        .into_par_iter()
        .map(|s| Ok(p.is_bad(recurrence_hits(orbit, s, p)?)))
        .collect::<Result<Vec<bool>>>()?;
    Ok(BadSetMask {
        grid: *grid,
        kind: MaskKind::Z,
        bits,
        params: serde_json::to_value(p)?,
    })
}

/// Lattice points in the box `|Re| ≤ a_max`, `|Im| ≤ b_max`.
fn box_points(lat: &Lattice2, a_max: f64, b_max: f64, mut visit: impl FnMut(Complex64)) {
    let (u0, v0) = lat.basis();
    // Rows run along the basis vector that crosses the box with the fewest rows.
    let candidates = [(u0, v0), (v0, u0), (u0 + v0, u0), (u0 - v0, u0)];
    let rows = |u: Complex64| u.re.abs() * b_max + u.im.abs() * a_max;
    let (u, v) = candidates
        .into_iter()
        .min_by(|x, y| rows(x.0).total_cmp(&rows(y.0)))
        .expect("non-empty");
    let det = (u.re * v.im - u.im * v.re).abs();
    let q_max = (rows(u) / det).floor() as i64;
    for q in -q_max..=q_max {
        let base = v * q as f64;
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (c, w, lim) in [(u.re, base.re, a_max), (u.im, base.im, b_max)] {
            if c.abs() > 0.0 {
                let (x, y) = ((-lim - w) / c, (lim - w) / c);
                lo = lo.max(x.min(y));
                hi = hi.min(x.max(y));
            } else if w.abs() > lim {
                hi = f64::NEG_INFINITY;
            }
        }
        if !(lo <= hi) {
            continue;
        }
        for p in (lo.ceil() as i64)..=(hi.floor() as i64) {
            visit(u * p as f64 + base);
        }
    }
}

/// Merged open excursion intervals of step `l` inside `[lo, hi)`.
fn excursions(lat: &Lattice2, lo: f64, hi: f64, big_b: f64, r: f64) -> Vec<(f64, f64)> {
    let c = 0.5 * (lo + hi);
    let rho = 0.5 * (hi - lo);
    let sheared = lat.transformed(&SL2Matrix::horocycle(c));
    let mut out = Vec::new();
    box_points(&sheared, rho * big_b + r, big_b, |w| {
        let b = w.im;
        if b == 0.0 {
            if w.re != 0.0 && w.re.abs() < r {
                out.push((f64::NEG_INFINITY, f64::INFINITY));
            }
            return;
        }
        if b.abs() >= big_b {
            return;
        }
        let centre = c - w.re / b;
        let rad = r / b.abs();
        if centre + rad > lo && centre - rad < hi {
            out.push((centre - rad, centre + rad));
        }
    });
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in out {
        match merged.last_mut() {
            Some(last) if a < last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

/// Exact non-recurrent set in `[-1, 1)` for the torus with lattice `lat`, as
/// disjoint sorted intervals.
pub fn torus_nonrecurrent_set(lat: &Lattice2, p: &RecurrenceParams) -> Result<Vec<(f64, f64)>> {
    p.validate()?;
    if p.mode != FlowMode::Horocycle {
        return Err(Error::Precondition("exact torus sets use horocycle base points".into()));
    }
    let mut pieces: Vec<(f64, f64, usize)> = vec![(-1.0, 1.0, 0)];
    for l in 1..=p.n {
        let lt = p.t * l as f64;
        let (big_b, r) = (p.eps * lt.exp(), p.eps * (-lt).exp());
        let mut next: Vec<(f64, f64, usize)> = Vec::new();
        for (lo, hi, hits) in pieces {
            let mut push = |a: f64, b: f64, h: usize| {
                // pieces that already have enough hits can never become bad
                if b > a && p.is_bad(h) {
                    match next.last_mut() {
                        Some(last) if last.1 == a && last.2 == h => last.1 = b,
                        _ => next.push((a, b, h)),
                    }
                }
            };
            let mut cursor = lo;
            for (a, b) in excursions(lat, lo, hi, big_b, r) {
                let (a, b) = (a.max(lo), b.min(hi));
                if a > cursor {
                    push(cursor, a, hits + 1);
                }
                push(a.max(cursor), b, hits);
                cursor = cursor.max(b);
            }
            push(cursor, hi, hits + 1);
        }
        pieces = next;
        if pieces.is_empty() {
            break;
        }
    }
    Ok(pieces.into_iter().map(|(a, b, _)| (a, b)).collect())
}

/// Bad-interval counts of a grid against an exactly known set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExactCount {
    pub level: usize,
    pub width: f64,
    pub total: f64,
    /// Intervals whose centre lies in the set (the sampling convention of the masks).
    pub centers: u64,
    /// Intervals meeting the set.
    pub meets: u64,
}

pub fn count_against(grid: &DirectionGrid, set: &[(f64, f64)]) -> ExactCount {
    let w = grid.width();
    let n = grid.len();
    let mut centers = 0u64;
    let mut meets = 0u64;
    let mut last_met: Option<usize> = None;
    for &(a, b) in set {
        centers += grid.centers_in(a, b).len() as u64;
        let first = grid.locate(a);
        let last = ((((b + 1.0) / w).ceil() as usize).max(1) - 1).min(n - 1);
        let first = match last_met {
            Some(k) if k >= first => k + 1,
            _ => first,
        };
        if last >= first {
            meets += (last - first + 1) as u64;
        }
        last_met = Some(last_met.map_or(last, |k| k.max(last)));
    }
    ExactCount {
        level: grid.level,
        width: w,
        total: n as f64,
        centers,
        meets,
    }
}

/// For each level `N`, the exact `Z_N` (with `N` samples) counted on the grid of radius `e^{-2tN}`.
pub fn torus_cover_counts(
    lat: &Lattice2,
    eps: f64,
    t: f64,
    delta: f64,
    levels: &[usize],
) -> Result<Vec<ExactCount>> {
    levels
        .iter()
        .map(|&n| {
            let p = RecurrenceParams {
                eps,
                n,
                t,
                delta,
                mode: FlowMode::Horocycle,
            };
            let set = torus_nonrecurrent_set(lat, &p)?;
            Ok(count_against(&DirectionGrid::counting(n, t)?, &set))
        })
        .collect()
}
