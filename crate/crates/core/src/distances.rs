//! Exact distances between preference vectors.
//!
//! All three distances lie in `[0, 1]`. Two all-zero vectors are at distance
//! 0, and an all-zero vector is at distance 1 from any nonzero one.
//!
//! Each distance has a dense form over slices and a sparse form over
//! [`SparsePreference`]. Both accumulate in increasing index order and
//! return bit-identical values.

use serde::{Deserialize, Serialize};

use crate::embedding::SparsePreference;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Ruzicka,
    Tanimoto,
    /// Set distance between supports. Meant for binary preferences.
    Jaccard,
}

impl DistanceKind {
    pub fn eval(self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            DistanceKind::Ruzicka => ruzicka(p, q),
            DistanceKind::Tanimoto => tanimoto(p, q),
            DistanceKind::Jaccard => jaccard(p, q),
        }
    }

    pub fn eval_sparse(self, p: &SparsePreference, q: &SparsePreference) -> f64 {
        match self {
            DistanceKind::Ruzicka => sparse::ruzicka(p, q),
            DistanceKind::Tanimoto => sparse::tanimoto(p, q),
            DistanceKind::Jaccard => sparse::jaccard(p, q),
        }
    }
}

#[inline]
fn one_minus_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        1.0 - num / den
    }
}

/// `1 − Σ min(pᵢ, qᵢ) / Σ max(pᵢ, qᵢ)`.
pub fn ruzicka(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "preference dimensions differ");
    let (mut lo, mut hi) = (0.0, 0.0);
    for (&a, &b) in p.iter().zip(q) {
        lo += a.min(b);
        hi += a.max(b);
    }
    one_minus_ratio(lo, hi)
}

/// `1 − ⟨p,q⟩ / (‖p‖² + ‖q‖² − ⟨p,q⟩)`.
pub fn tanimoto(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "preference dimensions differ");
    let (mut dot, mut pp, mut qq) = (0.0, 0.0, 0.0);
    for (&a, &b) in p.iter().zip(q) {
        dot += a * b;
        pp += a * a;
        qq += b * b;
    }
    one_minus_ratio(dot, pp + qq - dot)
}

/// `1 − |supp p ∩ supp q| / |supp p ∪ supp q|`.
pub fn jaccard(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "preference dimensions differ");
    let (mut inter, mut union) = (0usize, 0usize);
    for (&a, &b) in p.iter().zip(q) {
        let (x, y) = (a != 0.0, b != 0.0);
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    one_minus_ratio(inter as f64, union as f64)
}

pub mod sparse {
    use super::one_minus_ratio;
    use crate::embedding::SparsePreference;

    enum Step {
        Left(f64),
        Right(f64),
        Both(f64, f64),
    }

    /// Walks the union of both supports in increasing index order.
    #[inline]
    fn merge(p: &SparsePreference, q: &SparsePreference, mut f: impl FnMut(Step)) {
        assert_eq!(p.dim(), q.dim(), "preference dimensions differ");
        let (pi, pv) = (p.indices(), p.values());
        let (qi, qv) = (q.indices(), q.values());
        let (mut i, mut j) = (0, 0);
        while i < pi.len() && j < qi.len() {
            match pi[i].cmp(&qi[j]) {
                std::cmp::Ordering::Less => {
                    f(Step::Left(pv[i]));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    f(Step::Right(qv[j]));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    f(Step::Both(pv[i], qv[j]));
                    i += 1;
                    j += 1;
                }
            }
        }
        pv[i..].iter().for_each(|&v| f(Step::Left(v)));
        qv[j..].iter().for_each(|&v| f(Step::Right(v)));
    }

    pub fn ruzicka(p: &SparsePreference, q: &SparsePreference) -> f64 {
        let (mut lo, mut hi) = (0.0, 0.0);
        merge(p, q, |s| match s {
            Step::Left(v) | Step::Right(v) => hi += v,
            Step::Both(a, b) => {
                lo += a.min(b);
                hi += a.max(b);
            }
        });
        one_minus_ratio(lo, hi)
    }

    pub fn tanimoto(p: &SparsePreference, q: &SparsePreference) -> f64 {
        let mut dot = 0.0;
        merge(p, q, |s| {
            if let Step::Both(a, b) = s {
                dot += a * b;
            }
        });
        one_minus_ratio(dot, p.sq_norm() + q.sq_norm() - dot)
    }

    pub fn jaccard(p: &SparsePreference, q: &SparsePreference) -> f64 {
        let (mut inter, mut union) = (0usize, 0usize);
        merge(p, q, |s| {
            union += 1;
            inter += matches!(s, Step::Both(..)) as usize;
        });
        one_minus_ratio(inter as f64, union as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const ALL: [DistanceKind; 3] = [DistanceKind::Ruzicka, DistanceKind::Tanimoto, DistanceKind::Jaccard];

    #[test]
    fn ruzicka_examples() {
        let p = [0.2, 0.9, 0.4];
        assert_eq!(ruzicka(&p, &p), 0.0);
        assert_eq!(ruzicka(&[0.3, 0.0], &[0.0, 0.8]), 1.0);
        // Σmin = 0.5 + 0.5, Σmax = 1.0 + 1.0
        assert_abs_diff_eq!(ruzicka(&[0.5, 1.0, 0.0], &[1.0, 0.5, 0.0]), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn tanimoto_examples() {
        let p = [0.2, 0.9, 0.4];
        assert_abs_diff_eq!(tanimoto(&p, &p), 0.0, epsilon = 1e-15);
        assert_eq!(tanimoto(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        // 1 − 1/(2 + 1 − 1)
        assert_eq!(tanimoto(&[1.0, 1.0], &[1.0, 0.0]), 0.5);
    }

    #[test]
    fn jaccard_examples() {
        assert_abs_diff_eq!(jaccard(&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]), 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(jaccard(&[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0]), 0.0);
        assert_eq!(jaccard(&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0]), 1.0);
    }

    #[test]
    fn zero_vector_conventions() {
        let zero = [0.0; 4];
        let q = [0.0, 0.7, 0.0, 0.1];
        for kind in ALL {
            assert_eq!(kind.eval(&zero, &zero), 0.0, "{kind:?}");
            assert_eq!(kind.eval(&zero, &q), 1.0, "{kind:?}");
            assert_eq!(kind.eval(&q, &zero), 1.0, "{kind:?}");
        }
    }

    #[test]
    #[should_panic(expected = "dimensions differ")]
    fn mismatched_dimensions_panic() {
        ruzicka(&[0.1, 0.2], &[0.1]);
    }

    fn unit_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
        // A third of the components are exactly zero, as in real embeddings.
        prop::collection::vec(prop_oneof![Just(0.0), 0.0..=1.0f64, 0.0..=1.0f64], len)
    }

    fn bin_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![Just(0.0), Just(1.0)], len)
    }

    fn pair(s: impl Fn(usize) -> BoxedStrategy<Vec<f64>>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..40).prop_flat_map(move |m| (s(m), s(m)))
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded((p, q) in pair(|m| unit_vec(m).boxed())) {
            for kind in ALL {
                let d = kind.eval(&p, &q);
                prop_assert!((0.0..=1.0).contains(&d));
                prop_assert_eq!(d, kind.eval(&q, &p));
            }
        }

        #[test]
        fn self_distance_is_zero(p in unit_vec(25)) {
            prop_assert_eq!(ruzicka(&p, &p), 0.0);
            prop_assert!(tanimoto(&p, &p).abs() <= 1e-12);
            prop_assert_eq!(jaccard(&p, &p), 0.0);
        }

        #[test]
        fn binary_inputs_collapse_to_jaccard((p, q) in pair(|m| bin_vec(m).boxed())) {
            let j = jaccard(&p, &q);
            prop_assert!((ruzicka(&p, &q) - j).abs() <= 1e-12);
            prop_assert!((tanimoto(&p, &q) - j).abs() <= 1e-12);
        }

        #[test]
        fn sparse_route_is_bit_identical((p, q) in pair(|m| unit_vec(m).boxed())) {
            let (sp, sq) = (SparsePreference::from_slice(&p), SparsePreference::from_slice(&q));
            for kind in ALL {
                prop_assert_eq!(kind.eval(&p, &q).to_bits(), kind.eval_sparse(&sp, &sq).to_bits());
            }
        }
    }
}
