//! Integer kernel for orbit work.
//!
//! Every point reached from a discontinuity lies in `(1/L)Z` where `L` is the
//! common denominator of the lengths, so orbits are computed on scaled integers.
//! `i128` is used whenever `2L` fits, `BigInt` otherwise.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::rational::Rational;

pub(crate) trait Coord: Clone + Ord + Hash + Debug + Send + Sync {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn zero() -> Self;
    fn to_bigint(&self) -> BigInt;
}

impl Coord for i128 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn zero() -> Self {
        0
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Coord for BigInt {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

/// Identifies the point `T^{∓k} β_i` in an orbit listing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitLabel {
    /// Index of the discontinuity `β_i`, `0 ≤ i < d`.
    pub beta: usize,
    /// Number of map applications.
    pub step: usize,
}

/// Two distinct orbit labels that land on the same point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub first: OrbitLabel,
    pub second: OrbitLabel,
    #[serde(with = "crate::rational")]
    pub point: Rational,
}

#[derive(Clone, Debug)]
pub(crate) struct Kernel<C> {
    betas: Vec<C>,
    total: C,
    trans: Vec<C>,
    image_bounds: Vec<C>,
    image_letter: Vec<usize>,
}

impl<C: Coord> Kernel<C> {
    fn from_scaled(scaled_lengths: &[BigInt], images: &[usize], conv: impl Fn(&BigInt) -> C) -> Self {
        let d = scaled_lengths.len();
        let lengths: Vec<C> = scaled_lengths.iter().map(&conv).collect();
        let mut betas = Vec::with_capacity(d + 1);
        betas.push(C::zero());
        for l in &lengths {
            let next = betas.last().unwrap().add(l);
            betas.push(next);
        }
        let total = betas[d].clone();
        let mut image_letter = vec![0usize; d];
        for (letter, &img) in images.iter().enumerate() {
            image_letter[img - 1] = letter;
        }
        let mut image_bounds = Vec::with_capacity(d + 1);
        image_bounds.push(C::zero());
        for &letter in &image_letter {
            let next = image_bounds.last().unwrap().add(&lengths[letter]);
            image_bounds.push(next);
        }
        let mut trans = vec![C::zero(); d];
        for (pos, &letter) in image_letter.iter().enumerate() {
            trans[letter] = image_bounds[pos].sub(&betas[letter]);
        }
        Self {
            betas,
            total,
            trans,
            image_bounds,
            image_letter,
        }
    }

    fn d(&self) -> usize {
        self.trans.len()
    }

    fn forward(&self, x: &C) -> C {
        let letter = self.betas.partition_point(|b| b <= x) - 1;
        x.add(&self.trans[letter])
    }

    fn backward(&self, y: &C) -> C {
        let pos = self.image_bounds.partition_point(|b| b <= y) - 1;
        y.sub(&self.trans[self.image_letter[pos]])
    }
}

#[derive(Clone, Debug)]
pub(crate) enum AnyKernel {
    Small(Kernel<i128>),
    Big(Kernel<BigInt>),
}

impl AnyKernel {
    pub(crate) fn new(scaled_lengths: &[BigInt], images: &[usize]) -> Self {
        let total: BigInt = scaled_lengths.iter().sum();
        // Intermediate sums stay within (-2L, 2L).
        if total.bits() < 125 {
            AnyKernel::Small(Kernel::from_scaled(scaled_lengths, images, |b| {
                b.to_i128().expect("checked bit length")
            }))
        } else {
            AnyKernel::Big(Kernel::from_scaled(scaled_lengths, images, |b| b.clone()))
        }
    }

    pub(crate) fn is_small(&self) -> bool {
        matches!(self, AnyKernel::Small(_))
    }
}

/// Incremental construction of `D_n` one depth at a time.
///
/// `D_n = {β_0} ∪ {T^{-k} β_i : 1 ≤ i < d, 0 ≤ k < n}`. The backward orbit of
/// `β_0` is omitted because `T^{-1} β_0` is always the discontinuity at the left
/// end of `I_{π⁻¹(1)}`, so it repeats an orbit already listed.
#[derive(Clone, Debug)]
struct TrackerImpl<C> {
    kernel: Kernel<C>,
    current: Vec<C>,
    points: BTreeMap<C, OrbitLabel>,
    depth: usize,
    min_gap: C,
    collision: Option<(OrbitLabel, OrbitLabel, C)>,
}

impl<C: Coord> TrackerImpl<C> {
    fn new(kernel: Kernel<C>) -> Self {
        let mut points = BTreeMap::new();
        points.insert(C::zero(), OrbitLabel { beta: 0, step: 0 });
        let min_gap = kernel.total.clone();
        Self {
            kernel,
            current: Vec::new(),
            points,
            depth: 0,
            min_gap,
            collision: None,
        }
    }

    fn advance(&mut self) {
        let d = self.kernel.d();
        if self.depth == 0 {
            self.current = self.kernel.betas[1..d].to_vec();
        } else if self.collision.is_none() {
            for p in self.current.iter_mut() {
                *p = self.kernel.backward(p);
            }
        }
        let step = self.depth;
        self.depth += 1;
        if self.collision.is_some() {
            return;
        }
        for idx in 0..self.current.len() {
            let label = OrbitLabel { beta: idx + 1, step };
            let p = self.current[idx].clone();
            self.insert(p, label);
            if self.collision.is_some() {
                return;
            }
        }
    }

    fn insert(&mut self, p: C, label: OrbitLabel) {
        let pred = self
            .points
            .range(..p.clone())
            .next_back()
            .map(|(k, _)| k.clone());
        let succ = self
            .points
            .range(p.clone()..)
            .next()
            .map(|(k, _)| k.clone())
            .unwrap_or_else(|| self.kernel.total.clone());
        match self.points.entry(p.clone()) {
            Entry::Occupied(e) => {
                self.collision = Some((*e.get(), label, p));
                self.min_gap = C::zero();
            }
            Entry::Vacant(e) => {
                e.insert(label);
                // 0 is always present, so pred exists for p > 0.
                let pred = pred.expect("origin is a cut point");
                let left = p.sub(&pred);
                let right = succ.sub(&p);
                if left < self.min_gap {
                    self.min_gap = left;
                }
                if right < self.min_gap {
                    self.min_gap = right;
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
enum AnyTracker {
    Small(TrackerImpl<i128>),
    Big(TrackerImpl<BigInt>),
}

/// Walks `n = 1, 2, ...` and exposes `ε_n` exactly after each step.
#[derive(Clone, Debug)]
pub struct PartitionTracker {
    inner: AnyTracker,
    scale: BigInt,
}

impl PartitionTracker {
    pub(crate) fn new(kernel: &AnyKernel, scale: BigInt) -> Self {
        let inner = match kernel {
            AnyKernel::Small(k) => AnyTracker::Small(TrackerImpl::new(k.clone())),
            AnyKernel::Big(k) => AnyTracker::Big(TrackerImpl::new(k.clone())),
        };
        Self { inner, scale }
    }

    /// Moves from `D_n` to `D_{n+1}`; the first call produces `D_1`.
    pub fn advance(&mut self) {
        match &mut self.inner {
            AnyTracker::Small(t) => t.advance(),
            AnyTracker::Big(t) => t.advance(),
        }
    }

    /// Advances until the current depth equals `n`.
    pub fn advance_to(&mut self, n: usize) {
        while self.depth() < n {
            self.advance();
        }
    }

    pub fn depth(&self) -> usize {
        match &self.inner {
            AnyTracker::Small(t) => t.depth,
            AnyTracker::Big(t) => t.depth,
        }
    }

    /// Shortest partition interval; zero once two cut points coincide.
    pub fn epsilon(&self) -> Rational {
        let gap = match &self.inner {
            AnyTracker::Small(t) => t.min_gap.to_bigint(),
            AnyTracker::Big(t) => t.min_gap.clone(),
        };
        Rational::new(gap, self.scale.clone())
    }

    pub fn collision(&self) -> Option<Collision> {
        let scale = self.scale.clone();
        match &self.inner {
            AnyTracker::Small(t) => t.collision.as_ref().map(|(a, b, p)| Collision {
                first: *a,
                second: *b,
                point: Rational::new(p.to_bigint(), scale),
            }),
            AnyTracker::Big(t) => t.collision.as_ref().map(|(a, b, p)| Collision {
                first: *a,
                second: *b,
                point: Rational::new(p.clone(), scale),
            }),
        }
    }

    pub fn len(&self) -> usize {
        match &self.inner {
            AnyTracker::Small(t) => t.points.len(),
            AnyTracker::Big(t) => t.points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorted cut points of the current partition.
    pub fn cut_points(&self) -> Vec<Rational> {
        let scale = &self.scale;
        match &self.inner {
            AnyTracker::Small(t) => t
                .points
                .keys()
                .map(|k| Rational::new(k.to_bigint(), scale.clone()))
                .collect(),
            AnyTracker::Big(t) => t
                .points
                .keys()
                .map(|k| Rational::new(k.clone(), scale.clone()))
                .collect(),
        }
    }
}

/// First exact coincidence among forward orbits `T^k β_i`, `1 ≤ i < d`, `0 ≤ k ≤ depth`.
pub(crate) fn first_forward_collision(
    kernel: &AnyKernel,
    depth: usize,
    scale: &BigInt,
) -> Option<Collision> {
    fn run<C: Coord>(k: &Kernel<C>, depth: usize) -> Option<(OrbitLabel, OrbitLabel, C)> {
        let d = k.d();
        let mut seen: HashMap<C, OrbitLabel> = HashMap::with_capacity((d - 1) * (depth + 1));
        let mut current: Vec<C> = k.betas[1..d].to_vec();
        for step in 0..=depth {
            if step > 0 {
                for p in current.iter_mut() {
                    *p = k.forward(p);
                }
            }
            for (idx, p) in current.iter().enumerate() {
                let label = OrbitLabel {
                    beta: idx + 1,
                    step,
                };
                if let Some(prev) = seen.insert(p.clone(), label) {
                    return Some((prev, label, p.clone()));
                }
            }
        }
        None
    }
    let hit = match kernel {
        AnyKernel::Small(k) => run(k, depth).map(|(a, b, p)| (a, b, p.to_bigint())),
        AnyKernel::Big(k) => run(k, depth),
    };
    hit.map(|(first, second, p)| Collision {
        first,
        second,
        point: Rational::new(p, scale.clone()),
    })
}
