//! 2×2 real matrices of determinant one.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DET_TOL: f64 = 1e-12;

/// `[[a, b], [c, d]]` acting on `x + iy` as a column vector `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SL2Matrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "snake_case")]
pub enum MatrixKind {
    /// `g_t = diag(e^t, e^{-t})`
    Geodesic(f64),
    /// `r_θ = [[cos θ, sin θ], [-sin θ, cos θ]]`
    Rotation(f64),
    /// `h_s = [[1, s], [0, 1]]`
    Horocycle(f64),
    /// `ȟ_s = [[1, 0], [s, 1]]`
    OppositeHorocycle(f64),
}

pub fn make_matrix(kind: MatrixKind) -> SL2Matrix {
    match kind {
        MatrixKind::Geodesic(t) => SL2Matrix::geodesic(t),
        MatrixKind::Rotation(theta) => SL2Matrix::rotation(theta),
        MatrixKind::Horocycle(s) => SL2Matrix::horocycle(s),
        MatrixKind::OppositeHorocycle(s) => SL2Matrix::opposite_horocycle(s),
    }
}

impl SL2Matrix {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let m = Self { a, b, c, d };
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return Err(Error::Precondition("matrix entries must be finite".into()));
        }
        if (m.det() - 1.0).abs() > DET_TOL {
            return Err(Error::Precondition(format!(
                "determinant {} differs from 1",
                m.det()
            )));
        }
        Ok(m)
    }

    pub const IDENTITY: SL2Matrix = SL2Matrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn geodesic(t: f64) -> Self {
        Self {
            a: t.exp(),
            b: 0.0,
            c: 0.0,
            d: (-t).exp(),
        }
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { a: c, b: s, c: -s, d: c }
    }

    pub fn horocycle(s: f64) -> Self {
        Self {
            a: 1.0,
            b: s,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn opposite_horocycle(s: f64) -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: s,
            d: 1.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.a * z.re + self.b * z.im, self.c * z.re + self.d * z.im)
    }

    /// `max |entries of (self − I)|`, the distance to the identity used for Lipschitz bounds.
    pub fn dist_to_identity(&self) -> f64 {
        (self.a - 1.0)
            .abs()
            .max(self.b.abs())
            .max(self.c.abs())
            .max((self.d - 1.0).abs())
    }

    pub fn max_entry_diff(&self, other: &SL2Matrix) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs())
    }
}

impl Mul for SL2Matrix {
    type Output = SL2Matrix;

    fn mul(self, o: SL2Matrix) -> SL2Matrix {
        SL2Matrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn named_matrices() {
        assert_eq!(make_matrix(MatrixKind::Geodesic(0.0)), SL2Matrix::IDENTITY);
        let r = make_matrix(MatrixKind::Rotation(FRAC_PI_2));
        assert!(r.max_entry_diff(&SL2Matrix { a: 0.0, b: 1.0, c: -1.0, d: 0.0 }) < 1e-15);
    }

    #[test]
    fn rotation_reduction_identity() {
        let theta: f64 = 0.3;
        let lhs = SL2Matrix::rotation(theta);
        let rhs = SL2Matrix::opposite_horocycle(-theta.tan())
            * SL2Matrix::geodesic(theta.cos().ln())
            * SL2Matrix::horocycle(theta.tan());
        assert!(lhs.max_entry_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn conjugated_opposite_horocycle_contracts() {
        let (t, s) = (1.7, 0.4);
        let lhs = SL2Matrix::geodesic(t) * SL2Matrix::opposite_horocycle(s) * SL2Matrix::geodesic(-t);
        let rhs = SL2Matrix::opposite_horocycle((-2.0 * t).exp() * s);
        assert!(lhs.max_entry_diff(&rhs) < 1e-14);
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(SL2Matrix::new(2.0, 0.0, 0.0, 1.0).is_err());
        assert!(SL2Matrix::new(2.0, 0.0, 0.0, 0.5).is_ok());
        assert!(SL2Matrix::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn inverse_and_serde() {
        let m = SL2Matrix::geodesic(0.7) * SL2Matrix::horocycle(-1.2);
        assert!((m * m.inverse()).max_entry_diff(&SL2Matrix::IDENTITY) < 1e-14);
        let json = serde_json::to_string(&MatrixKind::Horocycle(0.5)).unwrap();
        assert_eq!(json, r#"{"kind":"horocycle","param":0.5}"#);
    }
}
