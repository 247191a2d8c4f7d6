//! Interval exchange transformations with exact rational lengths.
//!
//! `T` maps `I_i = [β_{i-1}, β_i)` by translation onto the `π(i)`-th slot of
//! `[0, |λ|)`. Letters are 1-indexed in the public API.

mod diagnostics;
mod kernel;

pub use diagnostics::{
    write_samples_csv, Schedule, ShortIntervalSample, Verdict, WeakMixingEvidence,
    WeakMixingReport,
};
pub use kernel::{Collision, OrbitLabel, PartitionTracker};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::rational::{self, Rational};

use kernel::AnyKernel;

#[derive(Clone, Debug)]
pub struct Iet {
    lengths: Vec<Rational>,
    perm: Permutation,
    total: Rational,
    betas: Vec<Rational>,
    translations: Vec<Rational>,
    scale: BigInt,
    kernel: AnyKernel,
}

impl PartialEq for Iet {
    fn eq(&self, other: &Self) -> bool {
        self.lengths == other.lengths && self.perm == other.perm
    }
}

impl Iet {
    pub fn new(lengths: Vec<Rational>, perm: Permutation) -> Result<Self> {
        if lengths.len() != perm.d() {
            return Err(Error::DimensionMismatch {
                expected: perm.d(),
                found: lengths.len(),
            });
        }
        if let Some(bad) = lengths.iter().find(|l| !l.is_positive()) {
            return Err(Error::InvalidIet(format!("length {bad} is not positive")));
        }
        if !perm.is_irreducible() {
            return Err(Error::NotIrreducible(perm.images().to_vec()));
        }
        let d = lengths.len();
        let mut betas = Vec::with_capacity(d + 1);
        betas.push(Rational::zero());
        for l in &lengths {
            let next = betas.last().unwrap() + l;
            betas.push(next);
        }
        let total = betas[d].clone();
        let translations = (1..=d)
            .map(|i| {
                let mut t = Rational::zero();
                for j in 1..=d {
                    if perm.apply(j) < perm.apply(i) {
                        t += &lengths[j - 1];
                    }
                }
                t - &betas[i - 1]
            })
            .collect();
        let scale = lengths
            .iter()
            .fold(BigInt::one(), |acc, l| acc.lcm(l.denom()));
        let scaled: Vec<BigInt> = lengths
            .iter()
            .map(|l| l.numer() * (&scale / l.denom()))
            .collect();
        let kernel = AnyKernel::new(&scaled, perm.images());
        Ok(Self {
            lengths,
            perm,
            total,
            betas,
            translations,
            scale,
            kernel,
        })
    }

    /// Convenience constructor from `"p/q"` strings and 1-indexed images.
    pub fn from_strs(lengths: &[&str], images: &[usize]) -> Result<Self> {
        let lengths = lengths
            .iter()
            .map(|s| rational::parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(lengths, Permutation::new(images.to_vec())?)
    }

    pub fn d(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn total(&self) -> &Rational {
        &self.total
    }

    /// `β_0 = 0, ..., β_d = |λ|`.
    pub fn betas(&self) -> &[Rational] {
        &self.betas
    }

    /// Common denominator of the lengths.
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    /// True when orbit work runs on the `i128` fast path.
    pub fn uses_machine_integers(&self) -> bool {
        self.kernel.is_small()
    }

    /// `T(x) - x` on `I_i` for 1-indexed `i`.
    pub fn translation(&self, i: usize) -> &Rational {
        &self.translations[i - 1]
    }

    pub fn lengths_f64(&self) -> Vec<f64> {
        self.lengths.iter().map(rational::to_f64).collect()
    }

    fn check_domain(&self, x: &Rational) -> Result<()> {
        if x.is_negative() || x >= &self.total {
            Err(Error::OutOfDomain(rational::format_rational(x)))
        } else {
            Ok(())
        }
    }

    /// 1-indexed letter `i` with `x ∈ I_i`.
    pub fn letter_of(&self, x: &Rational) -> Result<usize> {
        self.check_domain(x)?;
        Ok(self.betas.partition_point(|b| b <= x) - 1 + 1)
    }

    pub fn evaluate(&self, x: &Rational) -> Result<Rational> {
        let i = self.letter_of(x)?;
        Ok(x + &self.translations[i - 1])
    }

    pub fn evaluate_inverse(&self, y: &Rational) -> Result<Rational> {
        self.check_domain(y)?;
        // Image slot k (1-indexed) holds letter π⁻¹(k).
        let mut start = Rational::zero();
        for k in 1..=self.d() {
            let letter = self.perm.apply_inverse(k);
            let end = &start + &self.lengths[letter - 1];
            if y < &end {
                return Ok(y - &self.translations[letter - 1]);
            }
            start = end;
        }
        unreachable!("y < total was checked")
    }

    pub fn forward_orbit(&self, x: &Rational, steps: usize) -> Result<Vec<Rational>> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(x.clone());
        for _ in 0..steps {
            let next = self.evaluate(out.last().unwrap())?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn backward_orbit(&self, y: &Rational, steps: usize) -> Result<Vec<Rational>> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(y.clone());
        for _ in 0..steps {
            let next = self.evaluate_inverse(out.last().unwrap())?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn partition_tracker(&self) -> PartitionTracker {
        PartitionTracker::new(&self.kernel, self.scale.clone())
    }

    pub fn partition_report(&self, n: usize) -> Result<PartitionReport> {
        if n == 0 {
            return Err(Error::Precondition("partition depth n must be ≥ 1".into()));
        }
        let mut tracker = self.partition_tracker();
        tracker.advance_to(n);
        let epsilon_n = tracker.epsilon();
        let n_epsilon_n = &epsilon_n * Rational::from_integer(n.into());
        Ok(PartitionReport {
            n,
            cut_points: tracker.cut_points(),
            epsilon_n,
            n_epsilon_n,
            collision: tracker.collision(),
        })
    }

    pub fn check_idoc(&self, depth: usize) -> Result<IdocVerdict> {
        if depth == 0 {
            return Err(Error::Precondition("IDOC depth must be ≥ 1".into()));
        }
        let status = match kernel::first_forward_collision(&self.kernel, depth, &self.scale) {
            None => IdocStatus::NoCollisionUpToDepth,
            Some(c) => IdocStatus::CollisionAt {
                k: c.second.step,
                i: c.second.beta,
                j: c.first.beta,
                j_step: c.first.step,
                point: c.point,
            },
        };
        Ok(IdocVerdict {
            depth_checked: depth,
            status,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionReport {
    pub n: usize,
    #[serde(with = "crate::rational::vec")]
    pub cut_points: Vec<Rational>,
    #[serde(with = "crate::rational")]
    pub epsilon_n: Rational,
    #[serde(with = "crate::rational")]
    pub n_epsilon_n: Rational,
    /// Set when two cut points coincide; `epsilon_n` is then zero.
    pub collision: Option<Collision>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdocVerdict {
    pub depth_checked: usize,
    pub status: IdocStatus,
}

impl IdocVerdict {
    pub fn holds(&self) -> bool {
        matches!(self.status, IdocStatus::NoCollisionUpToDepth)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum IdocStatus {
    NoCollisionUpToDepth,
    /// `T^k β_i = T^{j_step} β_j`, found at the smallest possible `k`.
    CollisionAt {
        k: usize,
        i: usize,
        j: usize,
        j_step: usize,
        #[serde(with = "crate::rational")]
        point: Rational,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IetJson {
    #[serde(with = "crate::rational::vec")]
    lengths: Vec<Rational>,
    perm: Permutation,
}

impl Serialize for Iet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IetJson {
            lengths: self.lengths.clone(),
            perm: self.perm.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Iet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = IetJson::deserialize(d)?;
        Iet::new(raw.lengths, raw.perm).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutation::basis_vector;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn rot_third() -> Iet {
        Iet::from_strs(&["1/3", "2/3"], &[2, 1]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let t = rot_third();
        assert_eq!(t.evaluate(&q(1, 6)).unwrap(), q(5, 6));
        assert_eq!(t.evaluate(&q(1, 2)).unwrap(), q(1, 6));
        assert_eq!(t.evaluate_inverse(&q(5, 6)).unwrap(), q(1, 6));
        assert!(matches!(t.evaluate(&q(1, 1)), Err(Error::OutOfDomain(_))));
        assert!(matches!(t.evaluate(&q(-1, 5)), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn zero_maps_by_first_branch() {
        let t = Iet::from_strs(&["1/5", "1/3", "1/7", "1/11"], &[3, 1, 4, 2]).unwrap();
        // Σ_{π(j) < π(1)=3} λ_j = λ_2 + λ_4
        assert_eq!(t.evaluate(&Rational::zero()).unwrap(), q(1, 3) + q(1, 11));
        // T^{-1}(0) is the left end of I_{π⁻¹(1)}.
        let i0 = t.perm().apply_inverse(1);
        assert_eq!(t.evaluate_inverse(&Rational::zero()).unwrap(), t.betas()[i0 - 1]);
    }

    #[test]
    fn constructor_rejects_bad_data() {
        assert!(Iet::from_strs(&["1/2", "0"], &[2, 1]).is_err());
        assert!(Iet::from_strs(&["1/2", "1/2"], &[1, 2]).is_err());
        assert!(Iet::from_strs(&["1/2"], &[2, 1]).is_err());
    }

    #[test]
    fn depth_one_partition_is_the_intervals() {
        let t = Iet::from_strs(&["3/10", "1/10", "2/5", "1/5"], &[4, 3, 2, 1]).unwrap();
        let r = t.partition_report(1).unwrap();
        assert_eq!(r.cut_points, t.betas()[..4].to_vec());
        assert_eq!(r.epsilon_n, q(1, 10));
        assert!(r.collision.is_none());
    }

    #[test]
    fn rational_rotation_collides_at_period() {
        let t = Iet::from_strs(&["2/7", "5/7"], &[2, 1]).unwrap();
        for n in 1..7 {
            let r = t.partition_report(n).unwrap();
            assert!(r.collision.is_none(), "n = {n}");
            assert!(r.epsilon_n.is_positive());
        }
        let r = t.partition_report(7).unwrap();
        assert!(r.collision.is_some());
        assert!(r.epsilon_n.is_zero());
    }

    #[test]
    fn idoc_examples() {
        let half = Iet::from_strs(&["1/2", "1/2"], &[2, 1]).unwrap();
        let v = half.check_idoc(10).unwrap();
        match v.status {
            IdocStatus::CollisionAt { k, i, j, j_step, ref point } => {
                assert_eq!((k, i, j, j_step), (2, 1, 1, 0));
                assert_eq!(point, &q(1, 2));
            }
            _ => panic!("expected collision"),
        }
        let third = rot_third().check_idoc(3).unwrap();
        assert!(matches!(third.status, IdocStatus::CollisionAt { k: 3, .. }));
        assert!(rot_third().check_idoc(2).unwrap().holds());
    }

    #[test]
    fn idoc_collision_is_reproducible() {
        let t = Iet::from_strs(&["1/4", "1/3", "5/12"], &[3, 2, 1]).unwrap();
        let v = t.check_idoc(200).unwrap();
        if let IdocStatus::CollisionAt { k, i, j, j_step, point } = v.status {
            let a = t.forward_orbit(&t.betas()[i], k).unwrap();
            let b = t.forward_orbit(&t.betas()[j], j_step).unwrap();
            assert_eq!(a[k], point);
            assert_eq!(b[j_step], point);
        } else {
            panic!("rational IET must eventually collide");
        }
    }

    #[test]
    fn json_round_trip() {
        let t = rot_third();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"lengths":["1/3","2/3"],"perm":[2,1]}"#);
        let back: Iet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<Iet>(r#"{"lengths":["1"],"perm":[1],"x":1}"#).is_err());
    }

    #[test]
    fn large_denominators_use_bigint_path() {
        let big = format!("1/{}", num_traits::pow(BigInt::from(10), 60));
        let t = Iet::from_strs(&[&big, "1/3", "1/2"], &[3, 2, 1]).unwrap();
        assert!(!t.uses_machine_integers());
        let r = t.partition_report(20).unwrap();
        assert!(r.epsilon_n.is_positive());
        let y = t.evaluate(&t.betas()[1]).unwrap();
        assert_eq!(t.evaluate_inverse(&y).unwrap(), t.betas()[1]);
    }

    fn arb_iet() -> impl Strategy<Value = Iet> {
        (2usize..=6)
            .prop_flat_map(|d| {
                (
                    Just((1..=d).collect::<Vec<_>>()).prop_shuffle(),
                    proptest::collection::vec((1i64..500, 1i64..60), d),
                )
            })
            .prop_filter_map("irreducible", |(images, raw)| {
                let p = Permutation::new(images).ok()?;
                if !p.is_irreducible() {
                    return None;
                }
                let lengths = raw.iter().map(|&(a, b)| q(a, b)).collect();
                Iet::new(lengths, p).ok()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn evaluate_round_trips(t in arb_iet(), num in 0u64..1_000_000, den in 1u64..1000) {
            let x = (Rational::new(num.into(), den.into()) % t.total()).abs();
            let y = t.evaluate(&x).unwrap();
            prop_assert!(!y.is_negative() && &y < t.total());
            prop_assert_eq!(t.evaluate_inverse(&y).unwrap(), x.clone());
            prop_assert_eq!(t.evaluate(&t.evaluate_inverse(&x).unwrap()).unwrap(), x);
        }

        #[test]
        fn displacement_is_q_form(t in arb_iet(), frac in 0u32..1000) {
            let qf = t.perm().q_form();
            for i in 1..=t.d() {
                let x = &t.betas()[i - 1] + &t.lengths()[i - 1] * Rational::new(frac.into(), 1000.into());
                let disp = t.evaluate(&x).unwrap() - &x;
                let expected = qf.evaluate(t.lengths(), &basis_vector(t.d(), i)).unwrap();
                prop_assert_eq!(disp, expected);
            }
        }

        #[test]
        fn image_lengths_are_a_permutation(t in arb_iet()) {
            let mut images: Vec<(Rational, Rational)> = (1..=t.d())
                .map(|i| {
                    let start = t.evaluate(&t.betas()[i - 1]).unwrap();
                    (start, t.lengths()[i - 1].clone())
                })
                .collect();
            images.sort();
            let mut cursor = Rational::zero();
            for (start, len) in &images {
                prop_assert_eq!(start, &cursor);
                cursor += len;
            }
            prop_assert_eq!(&cursor, t.total());
        }

        #[test]
        fn partition_invariants(t in arb_iet(), n in 1usize..40) {
            let mut tracker = t.partition_tracker();
            let mut prev = t.total().clone();
            for k in 1..=n {
                tracker.advance();
                let eps = tracker.epsilon();
                prop_assert!(eps <= prev);
                prop_assert!(tracker.len() <= k * t.d());
                prop_assert!(&eps * Rational::from_integer(tracker.len().into()) <= *t.total());
                prev = eps;
            }
            let report = t.partition_report(n).unwrap();
            prop_assert_eq!(report.epsilon_n, prev);
            prop_assert!(report.cut_points.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
