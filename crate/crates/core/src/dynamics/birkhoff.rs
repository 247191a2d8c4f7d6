//! Continuous and discrete Birkhoff averages along `t ↦ g_t h_s x`.

use serde::Serialize;

use super::observable::{ObservableF, Orbit, Shear};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BirkhoffEstimate {
    pub value: f64,
    /// `|I_h − I_{2h}| / 3`, the Richardson estimate of the trapezoid error.
    pub quad_error: f64,
    pub nodes: usize,
}

/// Trapezoid average of `f(g_t h_s x)` over `t ∈ [a, b]` with about `dt` spacing.
pub fn segment_average(
    orbit: &Orbit,
    s: impl Into<Shear>,
    a: f64,
    b: f64,
    f: &ObservableF,
    dt: f64,
) -> Result<BirkhoffEstimate> {
    if !(b > a) || !(dt > 0.0) {
        return Err(Error::Precondition(format!(
            "need a < b and dt > 0, got [{a}, {b}] and dt = {dt}"
        )));
    }
    let mut n = ((b - a) / dt).ceil().max(2.0) as usize;
    n += n % 2;
    let h = (b - a) / n as f64;
    let ray = orbit.horocycle_ray(&s.into(), b)?;
    let values = (0..=n)
        .map(|k| f.eval(&ray.point(a + k as f64 * h)?))
        .collect::<Result<Vec<f64>>>()?;
    let trap = |stride: usize| {
        let inner: f64 = values[stride..n].iter().step_by(stride).sum();
        (0.5 * (values[0] + values[n]) + inner) * (h * stride as f64)
    };
    let fine = trap(1) / (b - a);
    let coarse = trap(2) / (b - a);
    Ok(BirkhoffEstimate {
        value: fine,
        quad_error: (fine - coarse).abs() / 3.0,
        nodes: n + 1,
    })
}

/// `(1/T) ∫_0^T f(g_t h_s x) dt` by the trapezoid rule; requires `dt ≤ T/10`.
pub fn birkhoff_average_continuous(
    orbit: &Orbit,
    s: impl Into<Shear>,
    t_total: f64,
    f: &ObservableF,
    dt: f64,
) -> Result<BirkhoffEstimate> {
    if !(t_total > 0.0) || !(dt > 0.0 && dt <= t_total / 10.0) {
        return Err(Error::Precondition(format!(
            "need T > 0 and 0 < dt ≤ T/10, got T = {t_total}, dt = {dt}"
        )));
    }
    segment_average(orbit, s, 0.0, t_total, f, dt)
}

/// `(1/N) Σ_{n=1..N} f(g_{ln} h_s x)`.
pub fn birkhoff_average_discrete(
    orbit: &Orbit,
    s: impl Into<Shear>,
    n_steps: usize,
    step: f64,
    f: &ObservableF,
) -> Result<f64> {
    if n_steps == 0 || !(step > 0.0) {
        return Err(Error::Precondition(format!(
            "need N ≥ 1 and l > 0, got N = {n_steps}, l = {step}"
        )));
    }
    let ray = orbit.horocycle_ray(&s.into(), step * n_steps as f64)?;
    let mut sum = 0.0;
    for n in 1..=n_steps {
        sum += f.eval(&ray.point(step * n as f64)?)?;
    }
    Ok(sum / n_steps as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{square_torus, SL2Matrix};

    #[test]
    fn constants_average_to_themselves() {
        let orbit = Orbit::new(&square_torus());
        let f = ObservableF::constant(0.7);
        let c = birkhoff_average_continuous(&orbit, 0.3, 5.0, &f, 0.1).unwrap();
        assert!((c.value - 0.7).abs() < 1e-14 && c.quad_error < 1e-14);
        let d = birkhoff_average_discrete(&orbit, 0.3, 17, 0.4, &f).unwrap();
        assert!((d - 0.7).abs() < 1e-14);
    }

    #[test]
    fn single_discrete_term() {
        let orbit = Orbit::new(&square_torus());
        let f = ObservableF::capped_systole(1.0);
        let d = birkhoff_average_discrete(&orbit, 0.25, 1, 0.8, &f).unwrap();
        let direct = f
            .eval(&orbit.point(&(SL2Matrix::geodesic(0.8) * SL2Matrix::horocycle(0.25))).unwrap())
            .unwrap();
        assert_eq!(d, direct);
    }

    #[test]
    fn preconditions() {
        let orbit = Orbit::new(&square_torus());
        let f = ObservableF::constant(1.0);
        assert!(birkhoff_average_continuous(&orbit, 0.0, 1.0, &f, 0.5).is_err());
        assert!(birkhoff_average_discrete(&orbit, 0.0, 0, 1.0, &f).is_err());
    }
}
