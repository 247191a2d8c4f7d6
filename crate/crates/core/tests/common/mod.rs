//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use teich_lab::Rational;

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Returns the committed golden value, or writes `fresh` when `TEICH_LAB_BLESS` is set.
pub fn golden(name: &str, fresh: &serde_json::Value) -> serde_json::Value {
    let path = golden_path(name);
    if std::env::var_os("TEICH_LAB_BLESS").is_some() {
        let text = serde_json::to_string_pretty(fresh).unwrap() + "\n";
        std::fs::write(&path, text).unwrap();
        return fresh.clone();
    }
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; rerun with TEICH_LAB_BLESS=1", path.display()));
    serde_json::from_str(&text).unwrap()
}

/// `min_{1 ≤ j ≤ n} ‖jα‖` from the continued fraction of `α`: the minimum sits at
/// the largest convergent denominator not exceeding `n`.
pub fn three_distance_min_gap(alpha: &Rational, n: u64) -> Rational {
    let (num, den) = (alpha.numer().clone(), alpha.denom().clone());
    let n = BigInt::from(n);
    if den <= n {
        return Rational::zero();
    }
    // Convergents p_k/q_k of num/den.
    let (mut p_prev, mut q_prev) = (BigInt::from(1), BigInt::from(0));
    let (mut p, mut q) = (num.div_floor(&den), BigInt::from(1));
    let (mut a, mut b) = (den.clone(), num.mod_floor(&den));
    let mut best = (p.clone(), q.clone());
    while !b.is_zero() {
        let c = a.div_floor(&b);
        let r = a.mod_floor(&b);
        let (p_next, q_next) = (&c * &p + &p_prev, &c * &q + &q_prev);
        if q_next > n {
            break;
        }
        best = (p_next.clone(), q_next.clone());
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        a = b;
        b = r;
    }
    let (p, q) = best;
    (alpha * Rational::from_integer(q) - Rational::from_integer(p)).abs()
}
