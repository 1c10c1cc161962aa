//! RuzHash: locality sensitive hashing for the Ruzicka distance.
//!
//! A preference vector `p ∈ [0,1]^m` is binarized against uniform thresholds
//! `τ` (`p′ᵢ = 1` iff `pᵢ > τᵢ`), so `P(p′ᵢ = q′ᵢ = 1) = min(pᵢ, qᵢ)` and
//! `P(p′ᵢ = 1 ∨ q′ᵢ = 1) = max(pᵢ, qᵢ)`. The binarized vector is then
//! MinHashed: its bucket is the first set dimension under a random
//! permutation. Two vectors collide with probability equal to the Jaccard
//! similarity of their binarizations. On binary inputs binarization is the
//! identity and the scheme is plain MinHash.
//!
//! A [`SplitRule`] bundles one `(τ, permutation)` realization with a balanced
//! grouping of the `m` buckets (plus the empty bucket) into `b` branches.
//! Rules are stored compactly: `τ` and the permutation keys are drawn on
//! demand from a counter-based generator keyed by the rule seed, and the
//! grouping is a random affine permutation of the dimensions reduced modulo
//! `b`. [`SplitRule::thresholds`] and [`SplitRule::permutation`] materialize
//! the same realization for reference computations.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::embedding::{PreferenceVector, SparsePreference};
use crate::rng::{splitmix_at, unit_f64};
use crate::{Error, Result, Rng};

/// Thresholds `τ`, one per dimension, each uniform in `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdVector(Vec<f64>);

impl ThresholdVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|t| !(0.0..1.0).contains(t)) {
            return Err(Error::config("thresholds must lie in [0, 1)"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryVector(Vec<bool>);

impl BinaryVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }
}

/// Order in which MinHash scans dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionPermutation {
    order: Vec<usize>,
}

impl DimensionPermutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &d in &order {
            if d >= order.len() || std::mem::replace(&mut seen[d], true) {
                return Err(Error::config("dimension order is not a permutation"));
            }
        }
        Ok(Self { order })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            order: (0..m).collect(),
        }
    }

    pub fn random(m: usize, rng: &mut Rng) -> Self {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        Self { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn dim(&self) -> usize {
        self.order.len()
    }
}

/// MinHash bucket: the first set dimension, or `Empty` for the zero vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bucket {
    Dim(usize),
    Empty,
}

pub fn sample_thresholds(m: usize, rng: &mut Rng) -> ThresholdVector {
    ThresholdVector((0..m).map(|_| rng.random::<f64>()).collect())
}

pub fn binarize(p: &[f64], tau: &ThresholdVector) -> BinaryVector {
    assert_eq!(p.len(), tau.dim(), "threshold dimension differs");
    BinaryVector(p.iter().zip(tau.values()).map(|(&v, &t)| v > t).collect())
}

pub fn minhash_bucket(pb: &BinaryVector, perm: &DimensionPermutation) -> Bucket {
    assert_eq!(pb.dim(), perm.dim(), "permutation dimension differs");
    perm.order
        .iter()
        .copied()
        .find(|&d| pb.0[d])
        .map_or(Bucket::Empty, Bucket::Dim)
}

/// One node split: thresholds, permutation and bucket-to-branch grouping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitRule {
    seed: u64,
    m: u32,
    b: u32,
    // group_of(d) = ((mul·d + add) mod m) mod b, with gcd(mul, m) = 1
    mul: u64,
    add: u64,
    empty_group: u32,
}

impl SplitRule {
    pub fn dim(&self) -> usize {
        self.m as usize
    }

    pub fn branching(&self) -> usize {
        self.b as usize
    }

    #[inline]
    pub fn threshold(&self, d: usize) -> f64 {
        unit_f64(splitmix_at(self.seed, 2 * d as u64))
    }

    /// Sort key of dimension `d`; the permutation visits dimensions by ascending key.
    #[inline]
    fn key(&self, d: usize) -> u64 {
        splitmix_at(self.seed, 2 * d as u64 + 1)
    }

    pub fn thresholds(&self) -> ThresholdVector {
        ThresholdVector((0..self.dim()).map(|d| self.threshold(d)).collect())
    }

    pub fn permutation(&self) -> DimensionPermutation {
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by_key(|&d| (self.key(d), d));
        DimensionPermutation { order }
    }

    #[inline]
    pub fn group_of(&self, bucket: Bucket) -> usize {
        match bucket {
            Bucket::Empty => self.empty_group as usize,
            Bucket::Dim(d) => {
                let slot = (self.mul as u128 * d as u128 + self.add as u128) % self.m as u128;
                (slot % self.b as u128) as usize
            }
        }
    }

    /// Bucket of a sparse preference vector. Only nonzero components can
    /// exceed a threshold, so the scan touches the support alone.
    #[inline]
    pub fn bucket_sparse(&self, p: &SparsePreference) -> Bucket {
        debug_assert_eq!(p.dim(), self.dim());
        let mut best: Option<(u64, usize)> = None;
        for (d, v) in p.iter() {
            if v > self.threshold(d) {
                let cand = (self.key(d), d);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        best.map_or(Bucket::Empty, |(_, d)| Bucket::Dim(d))
    }

    /// Bucket of a dense vector via explicit binarization and permutation.
    pub fn bucket_dense(&self, p: &[f64]) -> Bucket {
        minhash_bucket(&binarize(p, &self.thresholds()), &self.permutation())
    }

    #[inline]
    pub fn route_sparse(&self, p: &SparsePreference) -> usize {
        self.group_of(self.bucket_sparse(p))
    }

    pub fn route(&self, p: &PreferenceVector) -> usize {
        self.route_sparse(&SparsePreference::from_dense(p))
    }

    /// Number of buckets (dimensions) mapped to each branch.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.branching()];
        for d in 0..self.dim() {
            sizes[self.group_of(Bucket::Dim(d))] += 1;
        }
        sizes
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Draws a fresh split rule for `m` dimensions and `b` branches.
pub fn make_split_rule(m: usize, b: usize, rng: &mut Rng) -> Result<SplitRule> {
    if m == 0 || m > u32::MAX as usize {
        return Err(Error::config(format!("unsupported dimension m = {m}")));
    }
    if !(1..=m).contains(&b) {
        return Err(Error::config(format!("branching factor {b} outside 1..={m}")));
    }
    let m64 = m as u64;
    let mul = if m == 1 {
        1
    } else {
        loop {
            let a = rng.random_range(1..m64);
            if gcd(a, m64) == 1 {
                break a;
            }
        }
    };
    Ok(SplitRule {
        seed: rng.random(),
        m: m as u32,
        b: b as u32,
        mul,
        add: rng.random_range(0..m64),
        empty_group: rng.random_range(0..b as u32),
    })
}

/// Partitions point indices into `b` branches (some possibly empty).
pub fn apply_split(points: &[PreferenceVector], rule: &SplitRule) -> Vec<Vec<usize>> {
    let sparse: Vec<_> = points.iter().map(SparsePreference::from_dense).collect();
    apply_split_sparse(&sparse, rule)
}

pub fn apply_split_sparse<'a>(
    points: impl IntoIterator<Item = &'a SparsePreference>,
    rule: &SplitRule,
) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); rule.branching()];
    for (i, p) in points.into_iter().enumerate() {
        groups[rule.route_sparse(p)].push(i);
    }
    groups
}

/// Monte Carlo Ruzicka distance: over `trials` threshold draws, accumulates
/// co-activations and activations across all dimensions and returns one
/// minus their ratio (0 when nothing ever activates).
pub fn estimate_ruzicka(p: &[f64], q: &[f64], trials: usize, rng: &mut Rng) -> f64 {
    assert_eq!(p.len(), q.len(), "preference dimensions differ");
    assert!(trials >= 1, "at least one trial is required");
    let (mut both, mut either) = (0u64, 0u64);
    for _ in 0..trials {
        for (&a, &b) in p.iter().zip(q) {
            let t: f64 = rng.random();
            let (x, y) = (a > t, b > t);
            both += (x && y) as u64;
            either += (x || y) as u64;
        }
    }
    if either == 0 {
        0.0
    } else {
        1.0 - both as f64 / either as f64
    }
}
