//! Upper bounds for the box dimension of direction sets from cover counts.
//!
//! A set covered at level `n` by `C e^{γn}` intervals of radius `e^{-2tn}` has
//! upper box dimension at most `γ / 2t`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{BadSetMask, ExactCount};
use crate::error::{Error, Result};

/// Which length a [`CoverLevel`] records as its `width`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthConvention {
    /// `e^{-2tn}`.
    #[default]
    Radius,
    /// `2e^{-2tn}`.
    Diameter,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverLevel {
    pub n: usize,
    pub width: f64,
    pub count: u64,
    pub total: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub t: f64,
    pub convention: WidthConvention,
    pub levels: Vec<CoverLevel>,
}

impl CoverReport {
    /// Builds a report from `(n, count)` pairs at scale `e^{-2tn}` on `[-1, 1]`.
    pub fn from_counts(t: f64, convention: WidthConvention, counts: &[(usize, u64)]) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Precondition(format!("t must be positive, got {t}")));
        }
        let levels = counts
            .iter()
            .map(|&(n, count)| {
                let radius = (-2.0 * t * n as f64).exp();
                CoverLevel {
                    n,
                    width: match convention {
                        WidthConvention::Radius => radius,
                        WidthConvention::Diameter => 2.0 * radius,
                    },
                    count,
                    total: (1.0 / radius - 1e-9).ceil().max(1.0) as u64,
                }
            })
            .collect();
        let report = Self { t, convention, levels };
        report.validate()?;
        Ok(report)
    }

    /// Uses the `centers` column of exact counts.
    pub fn from_exact(t: f64, convention: WidthConvention, counts: &[ExactCount]) -> Result<Self> {
        let pairs: Vec<(usize, u64)> = counts.iter().map(|c| (c.level, c.centers)).collect();
        Self::from_counts(t, convention, &pairs)
    }

    fn validate(&self) -> Result<()> {
        for w in self.levels.windows(2) {
            if w[1].n <= w[0].n || w[1].width >= w[0].width {
                return Err(Error::InconsistentLevels(format!(
                    "levels {} and {} are not strictly increasing",
                    w[0].n, w[1].n
                )));
            }
        }
        if let Some(l) = self.levels.iter().find(|l| l.count > l.total) {
            return Err(Error::InconsistentLevels(format!(
                "level {} counts {} of {} intervals",
                l.n, l.count, l.total
            )));
        }
        Ok(())
    }

    /// CSV body rows `(n, width, count)` without header.
    pub fn rows(&self) -> Vec<(usize, f64, u64)> {
        self.levels.iter().map(|l| (l.n, l.width, l.count)).collect()
    }
}

/// Counts the bad intervals of each mask. Levels must increase strictly and every
/// grid step must equal `t`.
pub fn accumulate_cover(masks: &[BadSetMask], t: f64, convention: WidthConvention) -> Result<CoverReport> {
    for m in masks {
        if (m.grid.step - t).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(Error::InconsistentLevels(format!(
                "mask at level {} has step {} but t = {t}",
                m.grid.level, m.grid.step
            )));
        }
    }
    let counts: Vec<(usize, u64)> = masks.iter().map(|m| (m.grid.level, m.count() as u64)).collect();
    let mut report = CoverReport::from_counts(t, convention, &counts)?;
    for (l, m) in report.levels.iter_mut().zip(masks) {
        l.total = m.grid.len() as u64;
    }
    report.validate()?;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual.
    pub rms_residual: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`; `None` below two distinct abscissae.
pub fn least_squares(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    Some(LinearFit {
        slope,
        intercept,
        rms_residual: (rss / n).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionEstimate {
    /// Growth rate of `log count` per level.
    pub slope: f64,
    pub dim_upper: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    pub rms_residual: f64,
    /// Levels used in the fit.
    pub levels_used: Vec<usize>,
    /// Every count in the window was zero; the estimate is `0` by convention.
    pub empty: bool,
}

/// Which levels enter the fit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWindow {
    /// The finer half of the levels, at least three.
    #[default]
    TopHalf,
    All,
    /// The last `k` levels.
    Last(usize),
}

pub fn estimate_dimension(report: &CoverReport) -> Result<DimensionEstimate> {
    estimate_dimension_with(report, FitWindow::default())
}

/// Least-squares fit of `log count` against `n`; `dim_upper = slope / 2t`.
/// Levels with zero count are left out of the fit.
pub fn estimate_dimension_with(report: &CoverReport, window: FitWindow) -> Result<DimensionEstimate> {
    let len = report.levels.len();
    if len < 3 {
        return Err(Error::InsufficientLevels { needed: 3, found: len });
    }
    let keep = match window {
        FitWindow::TopHalf => len.div_ceil(2).max(3),
        FitWindow::All => len,
        FitWindow::Last(k) => k.clamp(2, len),
    };
    let window = &report.levels[len - keep..];
    let used: Vec<&CoverLevel> = window.iter().filter(|l| l.count > 0).collect();
    if used.is_empty() {
        return Ok(DimensionEstimate {
            slope: 0.0,
            dim_upper: 0.0,
            intercept: f64::NEG_INFINITY,
            residuals: Vec::new(),
            rms_residual: 0.0,
            levels_used: window.iter().map(|l| l.n).collect(),
            empty: true,
        });
    }
    let points: Vec<(f64, f64)> = used.iter().map(|l| (l.n as f64, (l.count as f64).ln())).collect();
    let fit = least_squares(&points).ok_or(Error::InsufficientLevels {
        needed: 2,
        found: used.len(),
    })?;
    Ok(DimensionEstimate {
        slope: fit.slope,
        dim_upper: fit.slope / (2.0 * report.t),
        intercept: fit.intercept,
        residuals: points.iter().map(|p| p.1 - fit.slope * p.0 - fit.intercept).collect(),
        rms_residual: fit.rms_residual,
        levels_used: used.iter().map(|l| l.n).collect(),
        empty: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HausdorffSum {
    pub n: usize,
    /// `count · width^β` at this level.
    pub sum: f64,
}

/// `count · width^β` per level, with diameters `2e^{-2tn}` whatever the convention.
pub fn hausdorff_sum_check(report: &CoverReport, beta: f64) -> Result<Vec<HausdorffSum>> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Precondition(format!("β must lie in (0, 1], got {beta}")));
    }
    Ok(report
        .levels
        .iter()
        .map(|l| {
            let diam = 2.0 * (-2.0 * report.t * l.n as f64).exp();
            HausdorffSum {
                n: l.n,
                sum: l.count as f64 * diam.powf(beta),
            }
        })
        .collect())
}

/// Reference families with known dimension.
pub mod synthetic {
    use super::*;

    /// Scale for which level `k` has `3^k` intervals.
    pub fn cantor_t() -> f64 {
        3f64.ln() / 2.0
    }

    /// Middle-thirds set on `[-1, 1]` at levels `1..=k`: `2^n` of `3^n` intervals.
    pub fn cantor(k: usize) -> CoverReport {
        let counts: Vec<(usize, u64)> = (1..=k).map(|n| (n, 1u64 << n)).collect();
        CoverReport::from_counts(cantor_t(), WidthConvention::Radius, &counts).expect("valid levels")
    }

    /// Whole interval at levels `1..=k` for scale `t`.
    pub fn full(t: f64, k: usize) -> CoverReport {
        let mut r = CoverReport::from_counts(t, WidthConvention::Radius, &(1..=k).map(|n| (n, 0)).collect::<Vec<_>>())
            .expect("valid levels");
        for l in &mut r.levels {
            l.count = l.total;
        }
        r
    }

    pub fn singleton(t: f64, k: usize) -> CoverReport {
        CoverReport::from_counts(t, WidthConvention::Radius, &(1..=k).map(|n| (n, 1)).collect::<Vec<_>>())
            .expect("valid levels")
    }

    /// Bits of the middle-thirds construction on the `3^n` grid.
    pub fn cantor_bits(n: usize) -> Vec<bool> {
        (0..3usize.pow(n as u32))
            .map(|mut k| {
                for _ in 0..n {
                    if k % 3 == 1 {
                        return false;
                    }
                    k /= 3;
                }
                true
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DirectionGrid, MaskKind};

    #[test]
    fn cantor_bits_count_powers_of_two() {
        for n in 0..7 {
            assert_eq!(synthetic::cantor_bits(n).iter().filter(|b| **b).count(), 1 << n);
        }
    }

    #[test]
    fn masks_on_the_cantor_grid_accumulate() {
        let t = synthetic::cantor_t();
        let masks: Vec<BadSetMask> = (1..=6)
            .map(|n| BadSetMask {
                grid: DirectionGrid::new(n, t).unwrap(),
                kind: MaskKind::Z,
                bits: synthetic::cantor_bits(n),
                params: serde_json::Value::Null,
            })
            .collect();
        for m in &masks {
            assert_eq!(m.grid.len(), m.bits.len());
        }
        let r = accumulate_cover(&masks, t, WidthConvention::Radius).unwrap();
        assert_eq!(r.levels.iter().map(|l| l.count).collect::<Vec<_>>(), vec![2, 4, 8, 16, 32, 64]);
        let mut shuffled = masks.clone();
        shuffled.swap(0, 1);
        assert!(matches!(
            accumulate_cover(&shuffled, t, WidthConvention::Radius),
            Err(Error::InconsistentLevels(_))
        ));
        assert!(accumulate_cover(&masks, 1.0, WidthConvention::Radius).is_err());
    }

    #[test]
    fn too_few_levels() {
        let r = synthetic::singleton(1.0, 2);
        assert!(matches!(
            estimate_dimension(&r),
            Err(Error::InsufficientLevels { needed: 3, found: 2 })
        ));
    }

    #[test]
    fn zero_counts_are_empty() {
        let r = CoverReport::from_counts(1.0, WidthConvention::Radius, &[(1, 0), (2, 0), (3, 0)]).unwrap();
        let d = estimate_dimension(&r).unwrap();
        assert!(d.empty && d.dim_upper == 0.0);
    }
}
