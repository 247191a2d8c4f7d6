//! Systole-based height functions `α(x) = max(1, ℓ(x)^{-s})` and numerical
//! checks of the averaging inequalities along circles and horocycle arcs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::Lattice2;
use super::matrix::SL2Matrix;
use super::saddle::{lattice_systole, SystoleMethod, SystoleNorm};
use super::TranslationSurface;
use crate::error::{Error, Result};

/// Systoles below this are clamped (and logged) so deep-cusp points stay finite.
pub const SYSTOLE_FLOOR: f64 = 1e-8;

/// Truncation half-width for the Gaussian horocycle weight `e^{-s²}`.
pub const GAUSSIAN_CUTOFF: f64 = 6.0;

pub(crate) fn clamp_systole(l: f64) -> f64 {
    if l < SYSTOLE_FLOOR {
        log::warn!("systole {l:e} clamped to {SYSTOLE_FLOOR:e}");
        SYSTOLE_FLOOR
    } else {
        l
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightParams {
    /// Contraction factor in `avg α(g_t r_θ x) ≤ a α(x) + b`.
    pub a: f64,
    pub b: f64,
    /// Drift bound: `e^{-σt} α(x) ≤ α(g_t x) ≤ e^{σt} α(x)`.
    pub sigma: f64,
    /// Inequalities are only asserted for `t > t0`.
    pub t0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightFunction {
    pub exponent: f64,
    pub params: HeightParams,
    /// Euclidean by default, which makes `α` rotation invariant.
    pub norm: SystoleNorm,
    pub method: SystoleMethod,
    /// Largest tolerated ratio between neighbouring quadrature values.
    pub ratio_limit: f64,
}

impl HeightFunction {
    /// `α = max(1, ℓ^{-s})` with `σ = s` and the given contraction constants.
    pub fn new(exponent: f64, a: f64, b: f64, t0: f64) -> Self {
        Self {
            exponent,
            params: HeightParams {
                a,
                b,
                sigma: exponent,
                t0,
            },
            norm: SystoleNorm::Euclidean,
            method: SystoleMethod::Auto,
            ratio_limit: 1e3,
        }
    }

    pub fn with_norm(mut self, norm: SystoleNorm) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.params.b = b;
        self
    }

    fn of_systole(&self, l: f64) -> f64 {
        if self.exponent == 0.0 {
            return 1.0;
        }
        clamp_systole(l).powf(-self.exponent).max(1.0)
    }

    pub fn eval(&self, x: &TranslationSurface) -> Result<f64> {
        Ok(self.of_systole(x.systole_with(self.norm, self.method)?))
    }

    /// `α(m·x)`.
    pub fn eval_at(&self, x: &TranslationSurface, m: &SL2Matrix) -> Result<f64> {
        HeightEvaluator::new(self, x).at(m)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t > self.params.t0 {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "t = {t} must exceed t0 = {}",
                self.params.t0
            )))
        }
    }

    fn check_ratio(&self, values: &[f64], periodic: bool) -> Result<f64> {
        let mut worst: f64 = 1.0;
        let n = values.len();
        let pairs = if periodic { n } else { n.saturating_sub(1) };
        for i in 0..pairs {
            let (u, v) = (values[i], values[(i + 1) % n]);
            let r = u.max(v) / u.min(v).max(f64::MIN_POSITIVE);
            worst = worst.max(r);
        }
        if worst > self.ratio_limit {
            return Err(Error::QuadratureUnstable {
                ratio: worst,
                limit: self.ratio_limit,
            });
        }
        Ok(worst)
    }

    /// `(1/2π) ∫ α(g_t r_θ x) dθ` by the periodic trapezoid rule against `a α(x) + b`.
    pub fn verify_circle_average(
        &self,
        x: &TranslationSurface,
        t: f64,
        quadrature_n: usize,
    ) -> Result<CircleAverageReport> {
        self.check_time(t)?;
        if quadrature_n == 0 {
            return Err(Error::Precondition("quadrature_n must be ≥ 1".into()));
        }
        let ev = HeightEvaluator::new(self, x);
        let g = SL2Matrix::geodesic(t);
        let step = 2.0 * std::f64::consts::PI / quadrature_n as f64;
        let values = (0..quadrature_n)
            .into_par_iter()
            .map(|k| ev.at(&(g * SL2Matrix::rotation(step * k as f64))))
            .collect::<Result<Vec<f64>>>()?;
        let ratio = self.check_ratio(&values, true)?;
        let lhs = values.iter().sum::<f64>() / quadrature_n as f64;
        let alpha_x = ev.at(&SL2Matrix::IDENTITY)?;
        let rhs_bound = self.params.a * alpha_x + self.params.b;
        Ok(CircleAverageReport {
            t,
            lhs,
            alpha_x,
            rhs_bound,
            satisfied: lhs <= rhs_bound,
            nodes: quadrature_n,
            max_adjacent_ratio: ratio,
        })
    }

    /// `∫ α(g_t h_s x) w(s) ds` with `w = 1` on `[-1, 1]` or `w = e^{-s²}` on `[-6, 6]`.
    pub fn verify_horocycle_average(
        &self,
        x: &TranslationSurface,
        t: f64,
        mode: HorocycleMode,
        opts: QuadratureOptions,
    ) -> Result<HorocycleAverageReport> {
        self.check_time(t)?;
        let per_unit = opts.nodes_per_unit(t);
        let step = 1.0 / per_unit as f64;
        let half_width = match mode {
            HorocycleMode::Interval => 1.0,
            HorocycleMode::Gaussian => GAUSSIAN_CUTOFF,
        };
        let half_nodes = per_unit * half_width as usize;
        let ev = HeightEvaluator::new(self, x);
        let g = SL2Matrix::geodesic(t);
        let samples = (0..=2 * half_nodes)
            .into_par_iter()
            .map(|k| {
                let s = (k as f64 - half_nodes as f64) * step;
                ev.at(&(g * SL2Matrix::horocycle(s))).map(|v| (s, v))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let values: Vec<f64> = samples.iter().map(|&(_, v)| v).collect();
        let ratio = self.check_ratio(&values, false)?;
        let last = samples.len() - 1;
        let lhs: f64 = samples
            .iter()
            .enumerate()
            .map(|(k, &(s, v))| {
                let w = match mode {
                    HorocycleMode::Interval => 1.0,
                    HorocycleMode::Gaussian => (-s * s).exp(),
                };
                let end = if k == 0 || k == last { 0.5 } else { 1.0 };
                end * w * v
            })
            .sum::<f64>()
            * step;
        let alpha_x = ev.at(&SL2Matrix::IDENTITY)?;
        let rhs_bound = self.params.a * alpha_x + self.params.b;
        let truncation_weight_bound = match mode {
            HorocycleMode::Interval => 0.0,
            // ∫_{|s|>c} e^{-s²} ds ≤ e^{-c²}/c
            HorocycleMode::Gaussian => (-GAUSSIAN_CUTOFF * GAUSSIAN_CUTOFF).exp() / GAUSSIAN_CUTOFF,
        };
        Ok(HorocycleAverageReport {
            t,
            mode,
            lhs,
            alpha_x,
            rhs_bound,
            satisfied: lhs <= rhs_bound,
            nodes: samples.len(),
            step,
            truncation_weight_bound,
            max_adjacent_ratio: ratio,
        })
    }
}

/// Evaluates `α(m·x)`, through the period lattice when `x` is a one-point torus.
pub(crate) struct HeightEvaluator<'a> {
    h: &'a HeightFunction,
    x: &'a TranslationSurface,
    lattice: Option<Lattice2>,
}

impl<'a> HeightEvaluator<'a> {
    pub(crate) fn new(h: &'a HeightFunction, x: &'a TranslationSurface) -> Self {
        let lattice = match h.method {
            SystoleMethod::Auto => x.lattice(),
            SystoleMethod::Unfolding => None,
        };
        Self { h, x, lattice }
    }

    pub(crate) fn at(&self, m: &SL2Matrix) -> Result<f64> {
        let l = match &self.lattice {
            Some(lat) => lattice_systole(&lat.transformed(m), self.h.norm),
            None => self.x.act(m)?.systole_with(self.h.norm, self.h.method)?,
        };
        Ok(self.h.of_systole(l))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorocycleMode {
    Interval,
    /// Literal weight `e^{-s²}`, which is not normalized to a probability measure.
    Gaussian,
}

/// Step control for horocycle quadrature; nodes sit on the grid `s = k/m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOptions {
    /// Nodes per unit of `s`; by default `max(1000, 8 e^{2t})` so that the
    /// `e^{-2t}`-wide spikes of `α(g_t h_s x)` are resolved.
    pub nodes_per_unit: Option<usize>,
}

impl QuadratureOptions {
    pub fn nodes_per_unit(&self, t: f64) -> usize {
        self.nodes_per_unit
            .unwrap_or_else(|| ((8.0 * (2.0 * t).exp()).ceil() as usize).max(1000))
            .max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircleAverageReport {
    pub t: f64,
    pub lhs: f64,
    pub alpha_x: f64,
    pub rhs_bound: f64,
    pub satisfied: bool,
    pub nodes: usize,
    pub max_adjacent_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HorocycleAverageReport {
    pub t: f64,
    pub mode: HorocycleMode,
    pub lhs: f64,
    pub alpha_x: f64,
    pub rhs_bound: f64,
    pub satisfied: bool,
    pub nodes: usize,
    pub step: f64,
    /// Bound on the Gaussian weight mass discarded outside `[-6, 6]`.
    pub truncation_weight_bound: f64,
    pub max_adjacent_ratio: f64,
}
