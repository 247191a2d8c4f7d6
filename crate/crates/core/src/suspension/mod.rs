//! Suspensions of interval exchanges: the zippered polygon built from lengths
//! `λ` and heights `b`, checks that horocycle shears act by `λ ↦ λ + σb`, and
//! saddle connections produced by short partition intervals.

mod flow;

pub use flow::{
    first_return_oracle, separatrix_breakpoints, trace_first_return, EmpiricalIet, Piece,
    ReturnSample, Transversal,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::rational::{self, Rational};
use crate::surface::{SL2Matrix, SaddleConnection, TranslationSurface};

/// IET together with a suspension vector `b`.
///
/// Valid data has `Σ_{j≤i} b_j > 0` and `Σ_{π(j)≤i} b_j < 0` for `1 ≤ i < d`,
/// and `Σ b_j = 0` so that the base segment lies on the real axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SuspensionJson")]
pub struct SuspensionData {
    iet: Iet,
    b: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SuspensionJson {
    iet: Iet,
    b: Vec<f64>,
}

impl TryFrom<SuspensionJson> for SuspensionData {
    type Error = Error;
    fn try_from(j: SuspensionJson) -> Result<Self> {
        Self::new(j.iet, j.b)
    }
}

impl SuspensionData {
    pub fn new(iet: Iet, b: Vec<f64>) -> Result<Self> {
        let d = iet.d();
        if b.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: b.len(),
            });
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSuspension("b has non-finite entries".into()));
        }
        let scale: f64 = b.iter().map(|x| x.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        let sum: f64 = b.iter().sum();
        if sum.abs() > tol {
            return Err(Error::InvalidSuspension(format!(
                "Σb = {sum:e} must vanish"
            )));
        }
        let perm = iet.perm();
        let mut top = 0.0;
        let mut bottom = 0.0;
        for i in 1..d {
            top += b[i - 1];
            bottom += b[perm.apply_inverse(i) - 1];
            if !(top > tol) {
                return Err(Error::InvalidSuspension(format!(
                    "top partial sum {top} at i = {i} is not positive"
                )));
            }
            if !(bottom < -tol) {
                return Err(Error::InvalidSuspension(format!(
                    "bottom partial sum {bottom} at i = {i} is not negative"
                )));
            }
        }
        Ok(Self { iet, b })
    }

    /// The standard choice `b_j = π(j) - j`, valid for every irreducible `π`.
    pub fn canonical(iet: Iet) -> Self {
        let perm = iet.perm();
        let b = (1..=iet.d())
            .map(|j| perm.apply(j) as f64 - j as f64)
            .collect();
        Self::new(iet, b).expect("canonical suspension vector is valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Reference suspensions with `d ∈ {2, 3, 4}` bundled with the crate.
    pub fn shipped() -> Vec<SuspensionData> {
        serde_json::from_str(include_str!("../../data/suspensions.json"))
            .expect("bundled suspensions are valid")
    }

    pub fn iet(&self) -> &Iet {
        &self.iet
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Return times `h = Q b`; the vertical flow returns to the base after time `h_j` over `I_j`.
    pub fn heights(&self) -> Vec<f64> {
        let q = self.iet.perm().q_form();
        let d = self.iet.d();
        (0..d)
            .map(|i| (0..d).map(|j| q.entry(i + 1, j + 1) as f64 * self.b[j]).sum())
            .collect()
    }

    /// `Σ λ_j h_j = Q(λ, b)`.
    pub fn area(&self) -> f64 {
        self.iet
            .lengths_f64()
            .iter()
            .zip(self.heights())
            .map(|(l, h)| l * h)
            .sum()
    }

    /// Open interval of shears `σ` keeping `λ + σb` positive.
    pub fn admissible_shears(&self) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (l, &b) in self.iet.lengths_f64().iter().zip(&self.b) {
            if b < 0.0 {
                hi = hi.min(l / -b);
            } else if b > 0.0 {
                lo = lo.max(-l / b);
            }
        }
        (lo, hi)
    }

    /// Largest `ε₀` with `(-ε₀, ε₀)` inside the admissible shears.
    pub fn max_symmetric_shear(&self) -> f64 {
        let (lo, hi) = self.admissible_shears();
        (-lo).min(hi)
    }

    fn polygon(&self, lengths: &[f64]) -> Vec<Complex64> {
        let d = lengths.len();
        let perm = self.iet.perm();
        let zeta: Vec<Complex64> = lengths
            .iter()
            .zip(&self.b)
            .map(|(&l, &b)| Complex64::new(l, b))
            .collect();
        let mut top = vec![Complex64::new(0.0, 0.0); d + 1];
        for i in 1..=d {
            top[i] = top[i - 1] + zeta[i - 1];
        }
        let mut bottom = vec![Complex64::new(0.0, 0.0); d];
        for k in 1..d {
            bottom[k] = bottom[k - 1] + zeta[perm.apply_inverse(k) - 1];
        }
        let end = Complex64::new(top[d].re, 0.0);
        let mut poly = bottom;
        poly.push(end);
        poly.extend((1..d).rev().map(|i| top[i]));
        poly
    }

    fn surface_for(&self, lengths: &[f64]) -> Result<TranslationSurface> {
        let d = lengths.len();
        let perm = self.iet.perm();
        let gluings: Vec<_> = (1..=d)
            .map(|j| ((0, perm.apply(j) - 1), (0, 2 * d - j)))
            .collect();
        TranslationSurface::new(vec![self.polygon(lengths)], &gluings)
    }

    /// The polygon with bottom vertices `Σ_{π(j)≤k} ζ_j` and top vertices
    /// `Σ_{j≤k} ζ_j`, `ζ_j = λ_j + i b_j`, with equally labelled sides glued.
    /// Vertex 0 is the origin and vertex `d` the far end of the base segment.
    pub fn suspend(&self) -> Result<TranslationSurface> {
        self.surface_for(&self.iet.lengths_f64())
    }

    /// Base segment `[0, |λ|]`; the first return of the vertical flow to it is `T`.
    pub fn base_transversal(&self) -> Transversal {
        let total = rational::to_f64(self.iet.total());
        Transversal::new(0, Complex64::new(0.0, 0.0), Complex64::new(total, 0.0))
    }

    /// Compares `h_σ · suspend(λ, b)` with `suspend(λ + σb, b)` for each shear.
    ///
    /// The discrepancy is the larger of the vertex-wise distance and the
    /// two-sided matching distance of saddle-connection holonomies up to a bound
    /// covering every polygon side.
    pub fn verify_local_product(&self, shears: &[f64]) -> Result<LocalProductReport> {
        let (lo, hi) = self.admissible_shears();
        let lengths = self.iet.lengths_f64();
        let base = self.suspend()?;
        let bound = 1.5
            * base
                .edge_vectors()
                .iter()
                .map(|z| z.re.abs().max(z.im.abs()))
                .fold(0.0, f64::max);
        let mut samples = Vec::with_capacity(shears.len());
        for &sigma in shears {
            if !(sigma > lo && sigma < hi) {
                return Err(Error::Precondition(format!(
                    "shear {sigma} outside admissible interval ({lo}, {hi})"
                )));
            }
            let acted = base.act(&SL2Matrix::horocycle(sigma))?;
            let sheared: Vec<f64> = lengths
                .iter()
                .zip(&self.b)
                .map(|(l, b)| l + sigma * b)
                .collect();
            let direct = self.surface_for(&sheared)?;
            let vertex_gap = acted.polygons()[0]
                .iter()
                .zip(&direct.polygons()[0])
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let ha = acted.saddle_connections(bound)?;
            let hb = direct.saddle_connections(bound)?;
            let holonomy_gap = matching_distance(&ha, &hb, bound)
                .max(matching_distance(&hb, &ha, bound));
            samples.push(ShearSample {
                sigma,
                vertex_gap,
                holonomy_gap,
                connections: ha.len(),
            });
        }
        let max_discrepancy = samples
            .iter()
            .map(|s| s.vertex_gap.max(s.holonomy_gap))
            .fold(0.0, f64::max);
        Ok(LocalProductReport {
            admissible: (lo, hi),
            samples,
            max_discrepancy,
        })
    }

    /// Saddle connection across the shortest interval of the depth-`n` partition.
    ///
    /// The vertical strip over the shortest interval `J` is an embedded rectangle
    /// up to the `n`-th return, free of cone points inside, with cone points on
    /// both walls. Joining the left and right wall points with the smallest
    /// height difference gives a connection with `Re v = |J|`.
    pub fn short_interval_saddle_connection(&self, n: usize) -> Result<ShortIntervalConnection> {
        let report = self.iet.partition_report(n)?;
        if report.collision.is_some() {
            return Err(Error::Precondition(format!(
                "depth-{n} partition has coincident cut points"
            )));
        }
        let total = self.iet.total().clone();
        let cuts = &report.cut_points;
        let (k, width) = (0..cuts.len())
            .map(|k| {
                let right = cuts.get(k + 1).unwrap_or(&total);
                (k, right - &cuts[k])
            })
            .min_by(|a, b| a.1.cmp(&b.1))
            .expect("partition has at least one cut point");
        let left = cuts[k].clone();
        let betas = self.iet.betas();
        let d = self.iet.d();
        let heights = self.heights();
        let mut top_height = vec![0.0; d + 1];
        for i in 1..d {
            top_height[i] = top_height[i - 1] + self.b[i - 1];
        }
        let mut left_points: Vec<(usize, f64)> = Vec::new();
        let mut right_points: Vec<(usize, f64)> = Vec::new();
        let mut u = left.clone();
        let mut base_height = 0.0;
        for m in 0..=n {
            let w = &u + &width;
            if m < n {
                if let Some(i) = betas[..d].iter().position(|b| *b == u) {
                    left_points.push((m, base_height + top_height[i]));
                }
                if let Some(i) = betas[1..].iter().position(|b| *b == w) {
                    right_points.push((m, base_height + top_height[i + 1]));
                }
                base_height += heights[self.iet.letter_of(&u)? - 1];
                u = self.iet.evaluate(&u)?;
            } else {
                if u == betas[0] {
                    left_points.push((m, base_height));
                }
                if w == total {
                    right_points.push((m, base_height));
                }
            }
        }
        let mut best: Option<((usize, f64), (usize, f64))> = None;
        for &l in &left_points {
            for &r in &right_points {
                let gap = (r.1 - l.1).abs();
                if best.is_none_or(|(bl, br)| gap < (br.1 - bl.1).abs()) {
                    best = Some((l, r));
                }
            }
        }
        let ((left_step, left_height), (right_step, right_height)) = best.ok_or_else(|| {
            Error::InvalidSuspension("no cone point found on a wall of the strip".into())
        })?;
        let eps = rational::to_f64(&width);
        let start = match betas.iter().position(|b| *b == left) {
            Some(0) => (0, 0),
            Some(i) if left_step == 0 => (0, 2 * d - i),
            _ => (0, usize::MAX),
        };
        let h_min = heights.iter().copied().fold(f64::INFINITY, f64::min);
        let h_max = heights.iter().copied().fold(0.0, f64::max);
        Ok(ShortIntervalConnection {
            n,
            epsilon_n: width.clone(),
            n_epsilon_n: &width * Rational::from_integer(n.into()),
            interval: (left.clone(), &left + &width),
            connection: SaddleConnection {
                holonomy: Complex64::new(eps, right_height - left_height),
                start,
                path: Vec::new(),
            },
            left_step,
            right_step,
            h_min,
            h_max,
        })
    }
}

/// Largest distance from a holonomy in `a` (comfortably inside `bound`) to its nearest match in `b`.
fn matching_distance(a: &[SaddleConnection], b: &[SaddleConnection], bound: f64) -> f64 {
    let inner = bound * (1.0 - 1e-6);
    a.iter()
        .filter(|s| s.max_norm() <= inner)
        .map(|s| {
            b.iter()
                .map(|t| (s.holonomy - t.holonomy).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShearSample {
    pub sigma: f64,
    pub vertex_gap: f64,
    pub holonomy_gap: f64,
    pub connections: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalProductReport {
    pub admissible: (f64, f64),
    pub samples: Vec<ShearSample>,
    pub max_discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShortIntervalConnection {
    pub n: usize,
    #[serde(with = "crate::rational")]
    pub epsilon_n: Rational,
    #[serde(with = "crate::rational")]
    pub n_epsilon_n: Rational,
    #[serde(serialize_with = "ser_interval")]
    pub interval: (Rational, Rational),
    /// Start corner is `(0, usize::MAX)` when the left end point is not a polygon vertex;
    /// the crossing path is not tracked.
    pub connection: SaddleConnection,
    /// Returns of the left and right walls before reaching their cone points.
    pub left_step: usize,
    pub right_step: usize,
    pub h_min: f64,
    pub h_max: f64,
}

fn ser_interval<S: serde::Serializer>(
    iv: &(Rational, Rational),
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    [rational::format_rational(&iv.0), rational::format_rational(&iv.1)].serialize(s)
}

impl ShortIntervalConnection {
    /// `max(‖g_t v‖∞)` at `e^t = n / √(nε_n)`, which brings the connection to size `√(nε_n)`.
    pub fn renormalized_max_norm(&self) -> f64 {
        let ne = rational::to_f64(&self.n_epsilon_n);
        let et = self.n as f64 / ne.sqrt();
        let v = self.connection.holonomy;
        (v.re.abs() * et).max(v.im.abs() / et)
    }
}
