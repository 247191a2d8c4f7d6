//! Permutations on `d` letters: irreducibility, rotation detection, the type-W
//! classifier and the alternating form `Q`.
//!
//! The public API is 1-indexed: `images()[i - 1] == π(i)`.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    /// Builds `π` from its 1-indexed images `π(1), ..., π(d)`.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        if d == 0 {
            return Err(Error::InvalidPermutation("empty image list".into()));
        }
        let mut inverse = vec![0usize; d];
        for (i, &img) in images.iter().enumerate() {
            if img == 0 || img > d {
                return Err(Error::InvalidPermutation(format!(
                    "image {img} out of range 1..={d}"
                )));
            }
            if inverse[img - 1] != 0 {
                return Err(Error::InvalidPermutation(format!("image {img} repeated")));
            }
            inverse[img - 1] = i + 1;
        }
        Ok(Self { images, inverse })
    }

    pub fn identity(d: usize) -> Self {
        Self::new((1..=d).collect()).expect("identity is a bijection")
    }

    /// The reversal `(d, d-1, ..., 1)`.
    pub fn reversal(d: usize) -> Self {
        Self::new((1..=d).rev().collect()).expect("reversal is a bijection")
    }

    pub fn d(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `π(i)` for 1-indexed `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    /// `π⁻¹(j)` for 1-indexed `j`.
    pub fn apply_inverse(&self, j: usize) -> usize {
        self.inverse[j - 1]
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            images: self.inverse.clone(),
            inverse: self.images.clone(),
        }
    }

    /// No proper prefix `{1..j}` with `j < d` is mapped to itself.
    pub fn is_irreducible(&self) -> bool {
        let mut max_image = 0;
        for j in 1..self.d() {
            max_image = max_image.max(self.apply(j));
            if max_image == j {
                return false;
            }
        }
        true
    }

    /// `π(i+1) ≡ π(i) + 1 (mod d)` for every `1 ≤ i < d`.
    pub fn is_rotation(&self) -> bool {
        let d = self.d();
        (1..d).all(|i| self.apply(i + 1) % d == (self.apply(i) + 1) % d)
    }

    /// Runs the inductive `a_p` sequence and reports whether it ends at `π⁻¹(1)`.
    pub fn classify_type_w(&self) -> Result<TypeWReport> {
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible(self.images.clone()));
        }
        let d = self.d();
        let target = self.apply_inverse(1);
        let mut trace = vec![1usize];
        loop {
            let last = *trace.last().unwrap();
            if last == target || last == d + 1 {
                return Ok(TypeWReport {
                    type_w: last == target,
                    trace,
                });
            }
            if trace.len() > d {
                return Err(Error::TypeWNonTermination { trace });
            }
            // π(last) ≥ 2 here because last ≠ π⁻¹(1).
            let next = self.apply_inverse(self.apply(last) - 1) + 1;
            trace.push(next);
        }
    }

    pub fn is_type_w(&self) -> bool {
        self.classify_type_w().map(|r| r.type_w).unwrap_or(false)
    }

    pub fn q_form(&self) -> QForm {
        QForm::new(self)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.images)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.images.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let images = Vec::<usize>::deserialize(d)?;
        Permutation::new(images).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypeWReport {
    pub type_w: bool,
    /// The sequence `a_0, ..., a_l`.
    pub trace: Vec<usize>,
}

/// Matrix of the alternating form on the standard basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QForm {
    pub d: usize,
    pub matrix: Vec<Vec<i8>>,
}

impl QForm {
    pub fn new(p: &Permutation) -> Self {
        let d = p.d();
        let mut matrix = vec![vec![0i8; d]; d];
        for i in 1..=d {
            for j in 1..=d {
                matrix[i - 1][j - 1] = if i > j && p.apply(i) < p.apply(j) {
                    1
                } else if i < j && p.apply(i) > p.apply(j) {
                    -1
                } else {
                    0
                };
            }
        }
        Self { d, matrix }
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        self.matrix[i - 1][j - 1]
    }

    /// Exact `uᵀ Q v`.
    pub fn evaluate(&self, u: &[Rational], v: &[Rational]) -> Result<Rational> {
        self.check_len(u.len())?;
        self.check_len(v.len())?;
        let mut acc = Rational::zero();
        for (i, row) in self.matrix.iter().enumerate() {
            if u[i].is_zero() {
                continue;
            }
            let mut inner = Rational::zero();
            for (j, &q) in row.iter().enumerate() {
                match q {
                    1 => inner += &v[j],
                    -1 => inner -= &v[j],
                    _ => {}
                }
            }
            acc += &u[i] * inner;
        }
        Ok(acc)
    }

    /// Floating-point `uᵀ Q v`.
    pub fn evaluate_f64(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_len(u.len())?;
        self.check_len(v.len())?;
        let mut acc = 0.0;
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, &q) in row.iter().enumerate() {
                acc += u[i] * f64::from(q) * v[j];
            }
        }
        Ok(acc)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n == self.d {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.d,
                found: n,
            })
        }
    }
}

/// 1-indexed standard basis vector `e_i` of length `d`.
pub fn basis_vector(d: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); d];
    v[i - 1] = Rational::from_integer(1.into());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![]).is_err());
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![3, 1]).is_err());
    }

    #[test]
    fn irreducibility_examples() {
        assert!(perm(&[2, 1]).is_irreducible());
        assert!(!perm(&[1, 2]).is_irreducible());
        assert!(!perm(&[2, 1, 4, 3]).is_irreducible());
        assert!(perm(&[4, 3, 2, 1]).is_irreducible());
        assert!(perm(&[3, 1, 2]).is_irreducible());
    }

    #[test]
    fn rotation_examples() {
        assert!(perm(&[2, 1]).is_rotation());
        assert!(!perm(&[3, 2, 1]).is_rotation());
        assert!(perm(&[1, 2, 3]).is_rotation());
        assert!(perm(&[3, 1, 2]).is_rotation());
    }

    #[test]
    fn type_w_hand_traces() {
        let r3 = perm(&[3, 2, 1]).classify_type_w().unwrap();
        assert!(r3.type_w);
        assert_eq!(r3.trace, vec![1, 3]);

        let r4 = perm(&[4, 3, 2, 1]).classify_type_w().unwrap();
        assert!(!r4.type_w);
        assert_eq!(r4.trace, vec![1, 3, 5]);

        let r5 = perm(&[5, 4, 3, 2, 1]).classify_type_w().unwrap();
        assert!(r5.type_w);
        assert_eq!(r5.trace, vec![1, 3, 5]);

        // Stop set {π⁻¹(1), d+1} = {2, 3}; a_1 = π⁻¹(1) + 1 = 3.
        let r2 = perm(&[2, 1]).classify_type_w().unwrap();
        assert!(!r2.type_w);
        assert_eq!(r2.trace, vec![1, 3]);
    }

    #[test]
    fn reversals_alternate_with_parity() {
        for d in 3..=11 {
            let report = Permutation::reversal(d).classify_type_w().unwrap();
            assert_eq!(report.type_w, d % 2 == 1, "d = {d}");
        }
    }

    #[test]
    fn type_w_rejects_reducible() {
        assert!(matches!(
            perm(&[2, 1, 4, 3]).classify_type_w(),
            Err(Error::NotIrreducible(_))
        ));
    }

    #[test]
    fn q_form_examples() {
        let q = perm(&[3, 2, 1]).q_form();
        assert_eq!(q.matrix, vec![vec![0, -1, -1], vec![1, 0, -1], vec![1, 1, 0]]);
        assert!(Permutation::identity(5)
            .q_form()
            .matrix
            .iter()
            .flatten()
            .all(|&x| x == 0));

        let q2 = perm(&[2, 1]).q_form();
        assert_eq!(q2.evaluate(&basis_vector(2, 2), &basis_vector(2, 1)).unwrap(), r(1));

        let lam = vec![r(1), r(1), r(1)];
        assert_eq!(q.evaluate(&lam, &basis_vector(3, 1)).unwrap(), r(2));
    }

    #[test]
    fn q_form_dimension_mismatch() {
        let q = perm(&[2, 1]).q_form();
        assert!(matches!(
            q.evaluate(&[r(1)], &[r(1), r(2)]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn json_is_image_array() {
        let p = perm(&[3, 1, 2]);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[3,1,2]");
        let back: Permutation = serde_json::from_str("[3,1,2]").unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Permutation>("[1,1]").is_err());
    }

    fn arb_perm(max_d: usize) -> impl Strategy<Value = Permutation> {
        (2..=max_d)
            .prop_flat_map(|d| Just((1..=d).collect::<Vec<_>>()).prop_shuffle())
            .prop_map(|v| Permutation::new(v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn q_is_antisymmetric(p in arb_perm(12)) {
            let q = p.q_form();
            for i in 0..q.d {
                prop_assert_eq!(q.matrix[i][i], 0);
                for j in 0..q.d {
                    prop_assert_eq!(q.matrix[i][j], -q.matrix[j][i]);
                }
            }
        }

        #[test]
        fn type_w_terminates_within_bound(p in arb_perm(12)) {
            if p.is_irreducible() {
                let report = p.classify_type_w().unwrap();
                prop_assert!(report.trace.len() <= p.d() + 1);
                let last = *report.trace.last().unwrap();
                prop_assert!(last == p.apply_inverse(1) || last == p.d() + 1);
            }
        }

        #[test]
        fn q_lambda_e1_positive(
            p in arb_perm(10),
            raw in proptest::collection::vec(1u32..1000, 10),
        ) {
            prop_assume!(p.is_irreducible());
            let lam: Vec<Rational> = raw[..p.d()]
                .iter()
                .map(|&x| Rational::new(x.into(), 7.into()))
                .collect();
            let val = p.q_form().evaluate(&lam, &basis_vector(p.d(), 1)).unwrap();
            prop_assert!(val > Rational::zero());
        }

        #[test]
        fn q_vv_vanishes(p in arb_perm(8), raw in proptest::collection::vec(-50i64..50, 8)) {
            let v: Vec<Rational> = raw[..p.d()].iter().map(|&x| r(x)).collect();
            prop_assert!(p.q_form().evaluate(&v, &v).unwrap().is_zero());
        }
    }
}
