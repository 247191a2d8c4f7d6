//! Deviation sets for Birkhoff averages on direction space.
//!
//! With `f_i(s) = (1/N)∫_{iN}^{(i+1)N} f(g_t h_s x) dt`, the set `F_i(β)` holds
//! the directions with `f_i(s) > ν + β`, where `ν` is a reference value that the
//! caller estimates empirically. `B(f, N, ε, M)` holds the directions whose
//! average over `[0, MN]` exceeds `ν + ε`.

use rayon::prelude::*;
use serde::Serialize;

use super::birkhoff::segment_average;
use super::grid::{BadSetMask, DirectionGrid, MaskKind};
use super::observable::{ObservableF, Orbit};
use crate::error::{Error, Result};
use crate::surface::SL2Matrix;

/// Shared parameters of the deviation sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeviationParams {
    /// Empirical stand-in for the mean of `f` over the stratum.
    pub reference_value: f64,
    /// Segment length `N` of each `f_i`, also the grid step.
    pub segment: f64,
    /// Trapezoid spacing in `t`.
    pub dt: f64,
}

impl DeviationParams {
    fn check(&self) -> Result<()> {
        if !(self.segment > 0.0) || !(self.dt > 0.0) || !self.reference_value.is_finite() {
            return Err(Error::Precondition(
                "segment and dt must be positive, reference finite".into(),
            ));
        }
        Ok(())
    }

    /// `f_i(s)`.
    pub fn segment_value(&self, orbit: &Orbit, f: &ObservableF, i: usize, s: f64) -> Result<f64> {
        // TODO: share one ray across the segments of a direction.
        let a = i as f64 * self.segment;
        Ok(segment_average(orbit, s, a, a + self.segment, f, self.dt)?.value)
    }
}

/// `F_i(β)` on the grid `P_i` for each `i` in `levels`.
pub fn deviation_masks(
    orbit: &Orbit,
    f: &ObservableF,
    params: &DeviationParams,
    beta: f64,
    levels: &[usize],
) -> Result<Vec<BadSetMask>> {
    params.check()?;
    levels
        .iter()
        .map(|&i| {
            let grid = DirectionGrid::new(i, params.segment)?;
            let bits = grid
                .centers()
                .into_par_iter()
                .map(|c| Ok(params.segment_value(orbit, f, i, c)? > params.reference_value + beta))
                .collect::<Result<Vec<bool>>>()?;
            Ok(BadSetMask {
                grid,
                kind: MaskKind::F { index: i },
                bits,
                params: serde_json::json!({
                    "beta": beta,
                    "segment": params.segment,
                    "dt": params.dt,
                    "reference_value": params.reference_value,
                    "reference_is_empirical": true,
                    "observable": f.name,
                }),
            })
        })
        .collect()
}

/// `R_i`: intervals of `P_i` whose centre satisfies `g_{iN} h_c x ∈ K_ε`.
pub fn recurrent_mask(orbit: &Orbit, segment: f64, eps: f64, i: usize) -> Result<BadSetMask> {
    let grid = DirectionGrid::new(i, segment)?;
    let time = i as f64 * segment;
    let bits = grid
        .centers()
        .into_par_iter()
        .map(|c| orbit.ray(&SL2Matrix::horocycle(c), time)?.in_compact_set(time, eps))
        .collect::<Result<Vec<bool>>>()?;
    Ok(BadSetMask {
        grid,
        kind: MaskKind::Recurrent,
        bits,
        params: serde_json::json!({"eps": eps, "segment": segment, "index": i}),
    })
}

/// `B(f, N, ε, M)` on `grid`: average over `[0, MN]` above `ν + ε`, assembled from the `f_i`.
pub fn deviation_b_mask(
    orbit: &Orbit,
    f: &ObservableF,
    params: &DeviationParams,
    eps: f64,
    m: usize,
    grid: &DirectionGrid,
) -> Result<BadSetMask> {
    params.check()?;
    if m == 0 {
        return Err(Error::Precondition("M must be ≥ 1".into()));
    }
    let bits = grid
        .centers()
        .into_par_iter()
        .map(|c| {
            let mut sum = 0.0;
            for i in 0..m {
                sum += params.segment_value(orbit, f, i, c)?;
            }
            Ok(sum / m as f64 > params.reference_value + eps)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(BadSetMask {
        grid: *grid,
        kind: MaskKind::B,
        bits,
        params: serde_json::json!({
            "eps": eps,
            "M": m,
            "segment": params.segment,
            "reference_value": params.reference_value,
            "reference_is_empirical": true,
        }),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeroOneReport {
    pub i: usize,
    pub j: usize,
    /// `S(f) e^{2(i+1−j)N} / N`.
    pub margin: f64,
    /// Intervals of `P_j` whose centre is in `F_i(β)`.
    pub checked: usize,
    /// End points of those intervals falling outside `F_i(β − margin)`.
    pub violations: usize,
}

/// If the centre of `J ∈ P_j` lies in `F_i(β)`, `i < j`, then all of `J` lies in
/// `F_i(β − margin)`; checked at both end points of every such `J`.
pub fn zero_one_check(
    orbit: &Orbit,
    f: &ObservableF,
    params: &DeviationParams,
    beta: f64,
    i: usize,
    j: usize,
) -> Result<ZeroOneReport> {
    params.check()?;
    if i >= j {
        return Err(Error::Precondition(format!("need i < j, got {i} and {j}")));
    }
    let n = params.segment;
    let margin = f.sobolev() * (2.0 * (i as f64 + 1.0 - j as f64) * n).exp() / n;
    let grid = DirectionGrid::new(j, n)?;
    let level = params.reference_value + beta;
    let rows = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if params.segment_value(orbit, f, i, grid.center(k))? <= level {
                return Ok((0, 0));
            }
            let (lo, hi) = grid.interval(k);
            let mut bad = 0;
            for s in [lo, hi] {
                if params.segment_value(orbit, f, i, s)? <= level - margin {
                    bad += 1;
                }
            }
            Ok((1, bad))
        })
        .collect::<Result<Vec<(usize, usize)>>>()?;
    Ok(ZeroOneReport {
        i,
        j,
        margin,
        checked: rows.iter().map(|r| r.0).sum(),
        violations: rows.iter().map(|r| r.1).sum(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub samples: usize,
    pub in_b: usize,
    pub in_z: usize,
    /// Samples in `B` outside `Z` with at least `⌈δM⌉` indices in `F_i^R(ε/2)`.
    pub covered_by_f: usize,
    /// Sample points in `B` but in neither part of the union.
    pub violations: Vec<f64>,
}

/// Inclusion `B(f,N,ε,M) ⊆ Z(K_q, M, N, δ) ∪ ⋃_{|A|=⌈δM⌉} ⋂_{i∈A} F_i^R(ε/2)`, checked
/// at each sample point with `δ ≤ ε / (4 S(f))`.
///
/// `Z` uses the samples `i = 0..M−1` and is strict (`# outside / M > δ`). `s` is
/// counted in `R_i` when `g_{iN} h_s x` or the centre of its `P_i` interval lies in `K_q`.
#[allow(clippy::too_many_arguments)]
pub fn inclusion_check(
    orbit: &Orbit,
    f: &ObservableF,
    params: &DeviationParams,
    eps: f64,
    m: usize,
    q_eps: f64,
    delta: f64,
    samples: &[f64],
) -> Result<InclusionReport> {
    params.check()?;
    if !(delta > 0.0 && delta <= eps / (4.0 * f.sobolev())) {
        return Err(Error::Precondition(format!(
            "δ = {delta} must lie in (0, ε/(4S(f))] = (0, {}]",
            eps / (4.0 * f.sobolev())
        )));
    }
    let need = (delta * m as f64).ceil() as usize;
    let rows = samples
        .par_iter()
        .map(|&s| {
            let mut sum = 0.0;
            let mut outside = 0usize;
            let mut f_hits = 0usize;
            let ray = orbit.ray(&SL2Matrix::horocycle(s), m as f64 * params.segment)?;
            for i in 0..m {
                let fi = params.segment_value(orbit, f, i, s)?;
                sum += fi;
                let time = i as f64 * params.segment;
                let here = ray.in_compact_set(time, q_eps)?;
                if !here {
                    outside += 1;
                }
                let recurrent = here || {
                    let grid = DirectionGrid::counting(i, params.segment)?;
                    let c = grid.center(grid.locate(s));
                    orbit.ray(&SL2Matrix::horocycle(c), time)?.in_compact_set(time, q_eps)?
                };
                if recurrent && fi > params.reference_value + eps / 2.0 {
                    f_hits += 1;
                }
            }
            let in_b = sum / m as f64 > params.reference_value + eps;
            let in_z = outside as f64 / m as f64 > delta;
            Ok((s, in_b, in_z, f_hits >= need))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = InclusionReport {
        samples: samples.len(),
        in_b: 0,
        in_z: 0,
        covered_by_f: 0,
        violations: Vec::new(),
    };
    for (s, in_b, in_z, in_f) in rows {
        report.in_z += in_z as usize;
        if in_b {
            report.in_b += 1;
            if in_z {
                continue;
            }
            if in_f {
                report.covered_by_f += 1;
            } else {
                report.violations.push(s);
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceRow {
    pub indices: Vec<usize>,
    pub measure: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    /// Calibrated `a`, by default the largest single-mask measure.
    pub a: f64,
    pub rows: Vec<IndependenceRow>,
    pub satisfied_fraction: f64,
    pub violations: Vec<Vec<usize>>,
}

/// Measure of `⋂_{i∈A} F_i^R` against `a^{|A|}` for each tuple `A`.
///
/// `masks[k]` is intersected with `recurrent[k]` when given; all masks are
/// transported to the finest grid among them before intersecting.
pub fn independence_diagnostic(
    masks: &[BadSetMask],
    recurrent: Option<&[BadSetMask]>,
    tuples: &[Vec<usize>],
    a: Option<f64>,
) -> Result<IndependenceReport> {
    if masks.is_empty() {
        return Err(Error::Precondition("no masks given".into()));
    }
    if let Some(r) = recurrent {
        if r.len() != masks.len() || r.iter().zip(masks).any(|(x, y)| x.grid != y.grid) {
            return Err(Error::Precondition("recurrent masks must match the F masks".into()));
        }
    }
    let fine = masks
        .iter()
        .map(|m| m.grid)
        .max_by(|x, y| x.width().total_cmp(&y.width()).reverse())
        .expect("non-empty");
    let widths: Vec<f64> = (0..fine.len())
        .map(|k| {
            let (lo, hi) = fine.interval(k);
            (hi - lo) / 2.0
        })
        .collect();
    let refined: Vec<Vec<bool>> = masks
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let mut bits = m.refine_to(&fine);
            if let Some(r) = recurrent {
                for (b, keep) in bits.iter_mut().zip(r[k].refine_to(&fine)) {
                    *b &= keep;
                }
            }
            bits
        })
        .collect();
    let measure_of = |idx: &[usize]| -> f64 {
        widths
            .iter()
            .enumerate()
            .filter(|(k, _)| idx.iter().all(|&i| refined[i][*k]))
            .fold(0.0, |acc, (_, w)| acc + w)
    };
    let a = match a {
        Some(a) => a,
        None => (0..masks.len()).map(|i| measure_of(&[i])).fold(0.0, f64::max),
    };
    let mut rows = Vec::with_capacity(tuples.len());
    for t in tuples {
        if t.is_empty() || t.iter().any(|&i| i >= masks.len()) {
            return Err(Error::Precondition(format!("bad index tuple {t:?}")));
        }
        let measure = measure_of(t);
        let bound = a.powi(t.len() as i32);
        rows.push(IndependenceRow {
            indices: t.clone(),
            measure,
            bound,
            ok: measure <= bound + 1e-12,
        });
    }
    let violations: Vec<Vec<usize>> = rows.iter().filter(|r| !r.ok).map(|r| r.indices.clone()).collect();
    let satisfied_fraction = if rows.is_empty() {
        1.0
    } else {
        1.0 - violations.len() as f64 / rows.len() as f64
    };
    Ok(IndependenceReport {
        a,
        rows,
        satisfied_fraction,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(level: usize, bits: Vec<bool>) -> BadSetMask {
        BadSetMask {
            grid: DirectionGrid::new(level, 0.5).unwrap(),
            kind: MaskKind::F { index: level },
            bits,
            params: serde_json::Value::Null,
        }
    }

    #[test]
    fn disjoint_masks_have_empty_intersection() {
        let n = DirectionGrid::new(2, 0.5).unwrap().len();
        let a = mask(2, (0..n).map(|k| k % 2 == 0).collect());
        let b = mask(2, (0..n).map(|k| k % 2 == 1).collect());
        let r = independence_diagnostic(&[a, b], None, &[vec![0, 1]], Some(0.1)).unwrap();
        assert_eq!(r.rows[0].measure, 0.0);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn identical_full_masks_violate_unless_a_is_one() {
        let n = DirectionGrid::new(1, 0.5).unwrap().len();
        let a = mask(1, vec![true; n]);
        let r = independence_diagnostic(&[a.clone(), a.clone()], None, &[vec![0, 1]], Some(0.5)).unwrap();
        assert!((r.rows[0].measure - 1.0).abs() < 1e-12);
        assert_eq!(r.violations.len(), 1);
        let r = independence_diagnostic(&[a.clone(), a], None, &[vec![0, 1]], None).unwrap();
        assert!((r.a - 1.0).abs() < 1e-12 && r.violations.is_empty());
    }
}
