//! Decay of correlations of `f_t(s) = φ(g_t h_s x) − φ(h_β g_t h_s x)` in `|t₁ − t₂|`.

use rayon::prelude::*;
use serde::Serialize;

use super::observable::{ObservableF, Orbit, Ray};
use crate::error::{Error, Result};
use crate::surface::SL2Matrix;

/// Hard cap on quadrature nodes over `[-1, 1]`.
pub const MAX_CORRELATION_NODES: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationSample {
    pub t1: f64,
    pub t2: f64,
    /// `∫_{-1}^{1} f_{t₁} f_{t₂} ds`.
    pub value: f64,
    /// Difference to the same rule on every other node.
    pub quad_error: f64,
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub beta: f64,
    pub samples: Vec<CorrelationSample>,
    /// Least-squares slope of `log|C|` against `|t₁ − t₂|`; `None` when fewer
    /// than two samples are nonzero.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

fn f_t(ray: &Ray, phi: &ObservableF, t: f64, beta: f64) -> Result<f64> {
    let a = phi.eval(&ray.point(t)?)?;
    let b = phi.eval(&ray.point_after(&SL2Matrix::horocycle(beta), t)?)?;
    Ok(a - b)
}

/// Correlation integrals for each `(t₁, t₂)` and the fitted decay rate.
///
/// `nodes_per_unit` defaults to `max(1000, 8e^{2 max(t₁,t₂)})`, resolving the
/// scale on which `f_t` varies.
pub fn correlation_decay_test(
    orbit: &Orbit,
    phi: &ObservableF,
    beta: f64,
    t_pairs: &[(f64, f64)],
    nodes_per_unit: Option<usize>,
) -> Result<CorrelationReport> {
    let mut samples = Vec::with_capacity(t_pairs.len());
    for &(t1, t2) in t_pairs {
        let per_unit = nodes_per_unit
            .unwrap_or_else(|| (8.0 * (2.0 * t1.max(t2)).exp()).ceil().max(1000.0) as usize);
        let mut n = 2 * per_unit;
        n += n % 2;
        if n > MAX_CORRELATION_NODES {
            return Err(Error::QuadratureUnstable {
                ratio: n as f64 / MAX_CORRELATION_NODES as f64,
                limit: 1.0,
            });
        }
        let h = 2.0 / n as f64;
        let values = (0..=n)
            .into_par_iter()
            .map(|k| {
                let s = -1.0 + k as f64 * h;
                let ray = orbit.ray(&SL2Matrix::horocycle(s), t1.max(t2))?;
                Ok(f_t(&ray, phi, t1, beta)? * f_t(&ray, phi, t2, beta)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        let trap = |stride: usize| {
            let inner: f64 = values[stride..n].iter().step_by(stride).sum();
            (0.5 * (values[0] + values[n]) + inner) * h * stride as f64
        };
        let value = trap(1);
        samples.push(CorrelationSample {
            t1,
            t2,
            value,
            quad_error: (value - trap(2)).abs() / 3.0,
            nodes: n + 1,
        });
    }
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|c| c.value != 0.0)
        .map(|c| ((c.t1 - c.t2).abs(), c.value.abs().ln()))
        .collect();
    let (slope, intercept) = match crate::dimension::least_squares(&points) {
        Some(fit) => (Some(fit.slope), Some(fit.intercept)),
        None => (None, None),
    };
    Ok(CorrelationReport {
        beta,
        samples,
        slope,
        intercept,
    })
}
