//! Partitions of `[-1, 1]` into intervals of radius `e^{-2·level·step}` and
//! per-interval bad-set masks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest grid that is enumerated interval by interval.
pub const MAX_GRID_INTERVALS: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionGrid {
    pub level: usize,
    pub step: f64,
}

impl DirectionGrid {
    pub fn new(level: usize, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Precondition(format!("grid step {step} must be positive")));
        }
        let g = Self { level, step };
        let n = g.count_f64();
        if !(n <= MAX_GRID_INTERVALS as f64) {
            return Err(Error::Precondition(format!(
                "level {level} with step {step} has {n:.3e} intervals"
            )));
        }
        Ok(g)
    }

    /// Grid used only for arithmetic counting, without the enumeration limit.
    pub fn counting(level: usize, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Precondition(format!("grid step {step} must be positive")));
        }
        Ok(Self { level, step })
    }

    pub fn radius(&self) -> f64 {
        (-2.0 * self.level as f64 * self.step).exp()
    }

    pub fn width(&self) -> f64 {
        2.0 * self.radius()
    }

    fn count_f64(&self) -> f64 {
        (2.0 / self.width() - 1e-9).ceil().max(1.0)
    }

    pub fn len(&self) -> usize {
        self.count_f64() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether the last interval is cut short at `1`.
    pub fn last_clipped(&self) -> bool {
        self.interval(self.len() - 1).1 < -1.0 + self.len() as f64 * self.width() - 1e-12
    }

    /// Half-open interval `[lo, hi)`, the last one clipped at `1`.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        let w = self.width();
        let lo = -1.0 + k as f64 * w;
        let hi = if k + 1 >= self.len() {
            1.0
        } else {
            -1.0 + (k + 1) as f64 * w
        };
        (lo, hi)
    }

    pub fn center(&self, k: usize) -> f64 {
        let (lo, hi) = self.interval(k);
        0.5 * (lo + hi)
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.center(k)).collect()
    }

    /// Index of the interval containing `s ∈ [-1, 1]`.
    pub fn locate(&self, s: f64) -> usize {
        let k = ((s + 1.0) / self.width()).floor();
        (k.max(0.0) as usize).min(self.len() - 1)
    }

    /// Interval indices of this grid whose centre lies in `[lo, hi)`.
    pub fn centers_in(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.first_center_at_least(lo);
        a..self.first_center_at_least(hi).max(a)
    }

    /// Centres increase with `k`; all but the last follow `-1 + (k + 1/2)w`.
    fn first_center_at_least(&self, x: f64) -> usize {
        let n = self.len();
        let k = ((x + 1.0) / self.width() - 0.5).ceil().max(0.0) as usize;
        if k + 1 < n {
            k
        } else if self.center(n - 1) >= x {
            n - 1
        } else {
            n
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaskKind {
    Z,
    B,
    F { index: usize },
    Recurrent,
}

/// One bit per grid interval, set when the centre sample is bad.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadSetMask {
    pub grid: DirectionGrid,
    pub kind: MaskKind,
    #[serde(with = "bitstring")]
    pub bits: Vec<bool>,
    /// Parameters that produced the mask, recorded for export.
    pub params: serde_json::Value,
}

mod bitstring {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&bits.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(serde::de::Error::custom(format!("bad mask character {c:?}"))),
            })
            .collect()
    }
}

impl BadSetMask {
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Lebesgue probability measure on `[-1, 1]` of the marked intervals.
    pub fn measure(&self) -> f64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| {
                let (lo, hi) = self.grid.interval(k);
                hi - lo
            })
            .sum::<f64>()
            / 2.0
    }

    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Bits transported to a finer grid: each fine interval takes the bit of
    /// the coarse interval containing its centre.
    pub fn refine_to(&self, fine: &DirectionGrid) -> Vec<bool> {
        (0..fine.len())
            .map(|k| self.bits[self.grid.locate(fine.center(k))])
            .collect()
    }

    pub fn is_subset_of(&self, other: &BadSetMask) -> bool {
        self.bits.len() == other.bits.len()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals_tile_the_segment() {
        for (level, step) in [(0, 1.0), (1, 1.0), (2, 0.5), (3, 0.7), (4, 1.0)] {
            let g = DirectionGrid::new(level, step).unwrap();
            let n = g.len();
            assert_eq!(g.interval(0).0, -1.0);
            assert_eq!(g.interval(n - 1).1, 1.0);
            for k in 1..n {
                assert_eq!(g.interval(k - 1).1, g.interval(k).0);
            }
            for k in 0..n {
                assert_eq!(g.locate(g.center(k)), k);
            }
        }
    }

    #[test]
    fn centers_in_matches_brute_force() {
        let g = DirectionGrid::new(2, 0.61).unwrap();
        let centers = g.centers();
        for (lo, hi) in [(-1.0, 1.0), (-0.3, 0.2), (0.95, 1.0), (-1.0, -0.99), (0.5, 0.5)] {
            let brute = centers.iter().filter(|&&c| c >= lo && c < hi).count();
            assert_eq!(g.centers_in(lo, hi).len(), brute, "[{lo}, {hi})");
        }
    }

    #[test]
    fn level_zero_is_one_interval() {
        let g = DirectionGrid::new(0, 1.0).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.center(0), 0.0);
    }

    #[test]
    fn mask_json_round_trip() {
        let m = BadSetMask {
            grid: DirectionGrid::new(1, 1.0).unwrap(),
            kind: MaskKind::F { index: 3 },
            bits: vec![true, false, false, true],
            params: serde_json::json!({"eps": 0.1}),
        };
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"1001\""));
        assert_eq!(serde_json::from_str::<BadSetMask>(&s).unwrap(), m);
    }
}
