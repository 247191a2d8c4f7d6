//! Helpers for exact rationals: parsing `"p/q"` strings and serde adapters.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.125"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if s.contains('/') {
            return Err(Error::Config(format!("malformed rational '{s}'")));
        }
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        let num: BigInt = digits
            .parse()
            .map_err(|_| Error::Config(format!("malformed decimal '{s}'")))?;
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        let r = Rational::new(num, den);
        return Ok(if negative { -r } else { r });
    }
    s.parse::<Rational>()
        .map_err(|_| Error::Config(format!("malformed rational '{s}'")))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    // Large numerators and denominators overflow a naive ratio of floats.
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => {
            let shift = r.denom().bits().max(r.numer().bits()) as i64 - 60;
            let shift = shift.max(0) as usize;
            let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
            if d == 0.0 {
                // denominator much smaller than numerator
                r.to_f64().unwrap_or(f64::INFINITY)
            } else {
                n / d
            }
        }
    }
}

/// Exact conversion of a finite double to a rational.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn is_positive(r: &Rational) -> bool {
    r.is_positive()
}

pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
    let s = String::deserialize(d)?;
    parse_rational(&s).map_err(serde::de::Error::custom)
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rational(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_rational("1/3").unwrap(), Rational::new(1.into(), 3.into()));
        assert_eq!(parse_rational("7").unwrap(), Rational::from_integer(7.into()));
        assert_eq!(parse_rational("0.125").unwrap(), Rational::new(1.into(), 8.into()));
        assert_eq!(parse_rational("-2.5").unwrap(), Rational::new((-5).into(), 2.into()));
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn huge_ratio_converts_to_float() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let r = Rational::new(big.clone() + 1, big * 3);
        assert!((to_f64(&r) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn format_round_trip() {
        let r = Rational::new(22.into(), 7.into());
        assert_eq!(format_rational(&r), "22/7");
        assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }
}
