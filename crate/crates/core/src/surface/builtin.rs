//! Named example surfaces, all of area one.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::TranslationSurface;
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 3] = ["square_torus", "regular_octagon", "double_pentagon"];

pub fn builtin(name: &str) -> Result<TranslationSurface> {
    match name {
        "square_torus" => Ok(square_torus()),
        "regular_octagon" => Ok(regular_octagon()),
        "double_pentagon" => Ok(double_pentagon()),
        other => Err(Error::InvalidSurface(format!(
            "unknown built-in surface '{other}' (known: {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

/// Unit square with opposite sides glued.
pub fn square_torus() -> TranslationSurface {
    let sq = vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(0.0, 1.0),
    ];
    TranslationSurface::new(vec![sq], &[((0, 0), (0, 2)), ((0, 1), (0, 3))])
        .expect("square torus is valid")
        .normalize_area()
}

/// Polygon whose `k`-th side has direction `2πk/n`, starting at the origin.
fn regular_polygon(n: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(n);
    let mut z = Complex64::new(0.0, 0.0);
    for k in 0..n {
        v.push(z);
        z += Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
    }
    v
}

/// Regular octagon with opposite sides glued: genus 2, one cone point of angle 6π.
pub fn regular_octagon() -> TranslationSurface {
    let oct = regular_polygon(8);
    let gluings: Vec<_> = (0..4).map(|k| ((0, k), (0, k + 4))).collect();
    TranslationSurface::new(vec![oct], &gluings)
        .expect("octagon is valid")
        .normalize_area()
}

/// A regular pentagon and its point reflection, parallel sides glued.
pub fn double_pentagon() -> TranslationSurface {
    let p = regular_polygon(5);
    let q: Vec<Complex64> = p.iter().map(|z| -z).collect();
    let gluings: Vec<_> = (0..5).map(|k| ((0, k), (1, k))).collect();
    TranslationSurface::new(vec![p, q], &gluings)
        .expect("double pentagon is valid")
        .normalize_area()
}
