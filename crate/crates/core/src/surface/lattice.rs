//! Rank-two lattices in the plane, used as a fast path for one-point tori.

use num_complex::Complex64;

use super::matrix::SL2Matrix;
use super::triangulation::cross;

/// A Lagrange-reduced basis `(u, v)`: `|u| ≤ |v|` and `|⟨u,v⟩| ≤ |u|²/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice2 {
    u: Complex64,
    v: Complex64,
}

fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

fn max_norm(z: Complex64) -> f64 {
    z.re.abs().max(z.im.abs())
}

impl Lattice2 {
    /// Reduced basis of the lattice spanned by `u, v`; `None` if they are dependent.
    pub fn new(u: Complex64, v: Complex64) -> Option<Self> {
        if !(cross(u, v).abs() > 1e-14 * u.norm() * v.norm()) {
            return None;
        }
        Some(Self::reduce(u, v))
    }

    fn reduce(mut u: Complex64, mut v: Complex64) -> Self {
        if u.norm_sqr() > v.norm_sqr() {
            std::mem::swap(&mut u, &mut v);
        }
        for _ in 0..10_000 {
            let mu = (dot(u, v) / u.norm_sqr()).round();
            v -= u * mu;
            if v.norm_sqr() < u.norm_sqr() {
                std::mem::swap(&mut u, &mut v);
            } else {
                break;
            }
        }
        Self { u, v }
    }

    /// Lattice generated by a finite set of vectors, if it is discrete of rank two.
    pub fn from_generators(gens: &[Complex64]) -> Option<Self> {
        let scale = gens.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = 1e-9 * scale.max(1e-300);
        let mut rest: Vec<Complex64> = gens.iter().copied().filter(|z| z.norm() > tol).collect();
        rest.sort_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()));
        let first = *rest.first()?;
        let second_idx = rest
            .iter()
            .position(|&z| cross(first, z).abs() > 1e-9 * first.norm() * z.norm())?;
        let mut lat = Self::new(first, rest[second_idx])?;
        let mut pending: Vec<Complex64> = rest
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != 0 && i != second_idx)
            .map(|(_, &z)| z)
            .collect();
        let mut guard = 0;
        while let Some(w) = pending.pop() {
            guard += 1;
            if guard > 10_000 {
                return None;
            }
            let r = lat.reduce_mod(w);
            if r.norm() <= tol {
                continue;
            }
            // `r` is a non-lattice point: refine using the three vectors.
            let mut cand = [lat.u, lat.v, r];
            cand.sort_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()));
            let (a, b, c) = (cand[0], cand[1], cand[2]);
            let next = if cross(a, b).abs() > 1e-9 * a.norm() * b.norm() {
                pending.push(c);
                Self::new(a, b)?
            } else {
                pending.push(b);
                Self::new(a, c)?
            };
            lat = next;
        }
        Some(lat)
    }

    pub fn basis(&self) -> (Complex64, Complex64) {
        (self.u, self.v)
    }

    pub fn covolume(&self) -> f64 {
        cross(self.u, self.v).abs()
    }

    /// Coordinates `(x, y)` of `w = x u + y v`.
    pub fn coordinates(&self, w: Complex64) -> (f64, f64) {
        let det = cross(self.u, self.v);
        (cross(w, self.v) / det, cross(self.u, w) / det)
    }

    /// `w` minus the nearest lattice point in the basis rounding sense.
    pub fn reduce_mod(&self, w: Complex64) -> Complex64 {
        let (x, y) = self.coordinates(w);
        w - self.u * x.round() - self.v * y.round()
    }

    pub fn transformed(&self, m: &SL2Matrix) -> Self {
        Self::reduce(m.apply(self.u), m.apply(self.v))
    }

    pub fn shortest_euclidean(&self) -> f64 {
        self.u.norm()
    }

    /// Shortest nonzero vector in the max-norm.
    pub fn shortest_max_norm(&self) -> f64 {
        // For a reduced basis any vector with |mu + nv| ≤ √2|u| has max(|m|,|n|) ≤ 1;
        // the search radius 3 leaves room for rounding.
        let mut best = f64::INFINITY;
        for m in -3i32..=3 {
            for n in -3i32..=3 {
                if m == 0 && n == 0 {
                    continue;
                }
                let w = self.u * f64::from(m) + self.v * f64::from(n);
                best = best.min(max_norm(w));
            }
        }
        best
    }

    /// Primitive vectors with max-norm at most `bound`, one of each `±` pair.
    pub fn primitive_vectors(&self, bound: f64) -> Vec<Complex64> {
        // |mu + nv| ≥ √(3/4)·max(|m|,|n|)·|u| for a reduced basis.
        let radius = (bound * 2f64.sqrt() / (0.75f64.sqrt() * self.u.norm())).ceil() as i64 + 1;
        let mut out = Vec::new();
        for m in -radius..=radius {
            for n in -radius..=radius {
                if num_integer::gcd(m, n) != 1 {
                    continue;
                }
                if m < 0 || (m == 0 && n < 0) {
                    continue;
                }
                let w = self.u * m as f64 + self.v * n as f64;
                if max_norm(w) <= bound * (1.0 + 1e-12) {
                    out.push(w);
                }
            }
        }
        out
    }
}
