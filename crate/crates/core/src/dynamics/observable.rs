//! Observables on the orbit of a surface, with the Lipschitz data needed by the
//! deviation and correlation estimates.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::surface::{Lattice2, SL2Matrix, SystoleMethod, SystoleNorm, TranslationSurface};

/// `m·x` for a fixed base surface; one-point tori are carried as lattices.
#[derive(Clone, Debug)]
pub enum OrbitPoint {
    Torus(Lattice2),
    Surface(TranslationSurface),
}

impl OrbitPoint {
    /// Max-norm systole, clamped below like the height functions.
    pub fn systole(&self) -> Result<f64> {
        let l = match self {
            OrbitPoint::Torus(l) => l.shortest_max_norm(),
            OrbitPoint::Surface(x) => x.systole_with(SystoleNorm::Max, SystoleMethod::Auto)?,
        };
        Ok(crate::surface::clamp_systole(l))
    }

    pub fn lattice(&self) -> Option<&Lattice2> {
        match self {
            OrbitPoint::Torus(l) => Some(l),
            OrbitPoint::Surface(_) => None,
        }
    }
}

/// Base surface prepared for repeated evaluation along `SL(2,R)` orbits.
#[derive(Clone, Debug)]
pub struct Orbit {
    base: TranslationSurface,
    lattice: Option<Lattice2>,
}

impl Orbit {
    pub fn new(x: &TranslationSurface) -> Self {
        Self {
            base: x.clone(),
            lattice: x.lattice(),
        }
    }

    pub fn base(&self) -> &TranslationSurface {
        &self.base
    }

    pub fn point(&self, m: &SL2Matrix) -> Result<OrbitPoint> {
        Ok(match &self.lattice {
            Some(l) => OrbitPoint::Torus(l.transformed(m)),
            None => OrbitPoint::Surface(self.base.act(m)?),
        })
    }

    /// `ℓ(m·x) ≥ ε`.
    pub fn in_compact_set(&self, m: &SL2Matrix, eps: f64) -> Result<bool> {
        Ok(self.point(m)?.systole()? >= eps)
    }

    /// The ray `t ↦ g_t m x` for `t ∈ [0, t_max]`.
    pub fn ray(&self, m: &SL2Matrix, t_max: f64) -> Result<Ray> {
        if !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(Error::Precondition(format!("t_max must be finite and ≥ 0, got {t_max}")));
        }
        let kind = match &self.lattice {
            Some(l) if t_max <= DIRECT_RAY_TIME => RayKind::TorusDirect(*l, *m),
            Some(l) => RayKind::Torus(ladder(l, [m.a, m.b, m.c, m.d].map(exact), t_max)),
            None => RayKind::Surface(self.base.clone(), *m),
        };
        Ok(Ray { kind, t_max })
    }

    /// The ray `t ↦ g_t h_s x` with `s` taken exactly.
    pub fn horocycle_ray(&self, s: &Shear, t_max: f64) -> Result<Ray> {
        let Some(l) = &self.lattice else {
            return self.ray(&SL2Matrix::horocycle(s.value()), t_max);
        };
        if !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(Error::Precondition(format!("t_max must be finite and ≥ 0, got {t_max}")));
        }
        let one = Rational::one();
        let entries = [one.clone(), s.exact.clone(), Rational::zero(), one];
        Ok(Ray {
            kind: RayKind::Torus(ladder(l, entries, t_max)),
            t_max,
        })
    }
}

/// A horocycle parameter held exactly.
///
/// An `f64` is a dyadic rational with at most 53 significant bits, so its ray
/// stops tracking a generic direction once `e^{2t}` passes `2^53` and eventually
/// runs into the cusp. Random shears carry 128 bits.
#[derive(Clone, Debug, PartialEq)]
pub struct Shear {
    exact: Rational,
    approx: f64,
}

impl Shear {
    pub fn new(exact: Rational) -> Self {
        Self {
            approx: rational::to_f64(&exact),
            exact,
        }
    }

    /// Uniform on `[lo, hi)` at resolution `(hi − lo) / 2^128`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Self {
        let k = Rational::from_integer(BigInt::from(rng.random::<u128>()));
        let scale = Rational::from_integer(BigInt::one() << 128u32);
        Self::new(exact(lo) + (exact(hi) - exact(lo)) * k / scale)
    }

    pub fn value(&self) -> f64 {
        self.approx
    }

    pub fn exact(&self) -> &Rational {
        &self.exact
    }
}

impl From<f64> for Shear {
    fn from(s: f64) -> Self {
        Self::new(exact(s))
    }
}

impl From<Rational> for Shear {
    fn from(s: Rational) -> Self {
        Self::new(s)
    }
}

/// Below this length the plain product `g_t m` loses at most `e^{2t}` ulps.
const DIRECT_RAY_TIME: f64 = 8.0;

/// Spacing of the times at which a torus ray is reduced exactly.
const LADDER_STEP: f64 = 0.5;

/// `t ↦ g_t m x` along a geodesic ray.
///
/// Multiplying out `g_t m` in floating point loses every digit of `e^t(a + sb)`
/// once `e^t` reaches `1/ulp`. For tori the reduced basis is instead tracked with
/// exact integer combinations at times `k · LADDER_STEP` and kept in time-zero
/// coordinates, where each coordinate is rounded on its own.
#[derive(Clone, Debug)]
pub struct Ray {
    kind: RayKind,
    t_max: f64,
}

#[derive(Clone, Debug)]
enum RayKind {
    Torus(Vec<(Complex64, Complex64)>),
    TorusDirect(Lattice2, SL2Matrix),
    Surface(TranslationSurface, SL2Matrix),
}

#[derive(Clone)]
struct ExactVec {
    x: Rational,
    y: Rational,
}

impl ExactVec {
    fn new(x: &Rational, y: &Rational) -> Self {
        Self { x: x.clone(), y: y.clone() }
    }

    fn at(&self, tau: f64) -> Complex64 {
        Complex64::new(rational::to_f64(&self.x) * tau.exp(), rational::to_f64(&self.y) * (-tau).exp())
    }

    fn zero_time(&self) -> Complex64 {
        self.at(0.0)
    }
}

fn exact(v: f64) -> Rational {
    rational::from_f64(v).expect("finite matrix and lattice entries")
}

/// Exact basis `m u, m v` reduced at each ladder time up to `t_max`; `m` is row-major.
fn ladder(l: &Lattice2, m: [Rational; 4], t_max: f64) -> Vec<(Complex64, Complex64)> {
    let [a, b, c, d] = m;
    let image = |z: Complex64| {
        let (x, y) = (exact(z.re), exact(z.im));
        ExactVec::new(&(&a * &x + &b * &y), &(&c * &x + &d * &y))
    };
    let (u0, v0) = l.basis();
    let (mut u, mut v) = (image(u0), image(v0));
    let steps = (t_max / LADDER_STEP).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let tau = k as f64 * LADDER_STEP;
        for _ in 0..10_000 {
            let (mut fu, mut fv) = (u.at(tau), v.at(tau));
            if fu.norm_sqr() > fv.norm_sqr() {
                std::mem::swap(&mut u, &mut v);
                std::mem::swap(&mut fu, &mut fv);
            }
            let mu = ((fu.re * fv.re + fu.im * fv.im) / fu.norm_sqr()).round();
            if mu == 0.0 {
                break;
            }
            let mu = exact(mu);
            v = ExactVec {
                x: &v.x - &mu * &u.x,
                y: &v.y - &mu * &u.y,
            };
        }
        out.push((u.zero_time(), v.zero_time()));
    }
    out
}

impl Ray {
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// `post · g_t m x`.
    pub fn point_after(&self, post: &SL2Matrix, t: f64) -> Result<OrbitPoint> {
        if !(t >= 0.0 && t <= self.t_max * (1.0 + 1e-12) + 1e-12) {
            return Err(Error::Precondition(format!(
                "time {t} outside the ray [0, {}]",
                self.t_max
            )));
        }
        Ok(match &self.kind {
            RayKind::Torus(bases) => {
                let k = ((t / LADDER_STEP).round() as usize).min(bases.len() - 1);
                let g = *post * SL2Matrix::geodesic(t);
                let (u, v) = bases[k];
                let lat = Lattice2::new(g.apply(u), g.apply(v))
                    .ok_or_else(|| Error::Precondition("degenerate lattice along the ray".into()))?;
                OrbitPoint::Torus(lat)
            }
            RayKind::TorusDirect(l, m) => OrbitPoint::Torus(l.transformed(&(*post * SL2Matrix::geodesic(t) * *m))),
            RayKind::Surface(x, m) => OrbitPoint::Surface(x.act(&(*post * SL2Matrix::geodesic(t) * *m))?),
        })
    }

    pub fn point(&self, t: f64) -> Result<OrbitPoint> {
        self.point_after(&SL2Matrix::IDENTITY, t)
    }

    pub fn in_compact_set(&self, t: f64, eps: f64) -> Result<bool> {
        Ok(self.point(t)?.systole()? >= eps)
    }
}

type Evaluator = dyn Fn(&OrbitPoint) -> Result<f64> + Send + Sync;

/// A bounded Lipschitz function on the stratum.
///
/// `lip_constant` bounds `|f(gx) − f(x)|` by `lip · max|entries of g − I|` for every `g` and `x`.
#[derive(Clone)]
pub struct ObservableF {
    pub name: String,
    evaluator: Arc<Evaluator>,
    pub lip_constant: f64,
    pub sup_norm: f64,
}

impl fmt::Debug for ObservableF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObservableF")
            .field("name", &self.name)
            .field("lip_constant", &self.lip_constant)
            .field("sup_norm", &self.sup_norm)
            .finish()
    }
}

fn hyperbolic_distance(z: Complex64, w: Complex64) -> f64 {
    (1.0 + (z - w).norm_sqr() / (2.0 * z.im * w.im)).acosh()
}

/// Shape `v/u` of a reduced lattice basis, in the standard fundamental domain.
///
/// A negatively oriented basis is replaced by `(u, -v)`.
pub fn lattice_shape(l: &Lattice2) -> Complex64 {
    let (u, v) = l.basis();
    let tau = v / u;
    if tau.im < 0.0 {
        -tau
    } else {
        tau
    }
}

impl ObservableF {
    pub fn new<F>(name: &str, lip_constant: f64, sup_norm: f64, f: F) -> Self
    where
        F: Fn(&OrbitPoint) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            evaluator: Arc::new(f),
            lip_constant,
            sup_norm,
        }
    }

    pub fn sobolev(&self) -> f64 {
        self.lip_constant + self.sup_norm
    }

    pub fn eval(&self, p: &OrbitPoint) -> Result<f64> {
        (self.evaluator)(p)
    }

    pub fn eval_surface(&self, x: &TranslationSurface) -> Result<f64> {
        self.eval(&Orbit::new(x).point(&SL2Matrix::IDENTITY)?)
    }

    pub fn constant(c: f64) -> Self {
        Self::new("constant", 0.0, c.abs(), move |_| Ok(c))
    }

    /// `min(cap, ℓ(x))`; since `ℓ(gx) ≤ (1 + 2d)ℓ(x)` the Lipschitz constant is `2·cap`.
    pub fn capped_systole(cap: f64) -> Self {
        Self::new("capped_systole", 2.0 * cap, cap, move |p| {
            Ok(p.systole()?.min(cap))
        })
    }

    /// Tent of hyperbolic radius `radius` around the torus shape `center` (e.g. `1.5i`).
    ///
    /// The shape moves by at most `arccosh(1 + 4d²) ≤ 2√2·d` under `g` with
    /// `d = max|g − I|`, so the Lipschitz constant is `2√2 / radius`. Only the
    /// translates `center + k`, `|k| ≤ 1`, are compared, which is exact while the
    /// tent stays away from the unit circle.
    pub fn torus_bump(center: Complex64, radius: f64) -> Self {
        Self::new(
            "torus_bump",
            2.0 * std::f64::consts::SQRT_2 / radius,
            1.0,
            move |p| {
                let l = p.lattice().ok_or_else(|| {
                    Error::Precondition("torus_bump needs a one-point torus".into())
                })?;
                let tau = lattice_shape(l);
                let d = (-1..=1)
                    .map(|k| hyperbolic_distance(tau, center + k as f64))
                    .fold(f64::INFINITY, f64::min);
                Ok((1.0 - d / radius).max(0.0))
            },
        )
    }
}
