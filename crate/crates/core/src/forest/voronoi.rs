//! Voronoi splits for the PI-Forest baseline.

use rand::seq::index;

use crate::distances::DistanceKind;
use crate::embedding::{PreferenceVector, SparsePreference};
use crate::{Error, Result, Rng};

/// Nearest-center rule over `b` centers drawn from the node's points.
#[derive(Clone, Debug, PartialEq)]
pub struct VoronoiRule {
    centers: Vec<SparsePreference>,
    kind: DistanceKind,
}

impl VoronoiRule {
    pub fn centers(&self) -> &[SparsePreference] {
        &self.centers
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn branching(&self) -> usize {
        self.centers.len()
    }

    /// Index of the nearest center, ties going to the lowest index.
    /// Evaluates exactly `b` distances.
    pub fn route_sparse(&self, p: &SparsePreference) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (j, c) in self.centers.iter().enumerate() {
            let d = self.kind.eval_sparse(p, c);
            if d < best.0 {
                best = (d, j);
            }
        }
        best.1
    }

    pub fn route(&self, p: &PreferenceVector) -> usize {
        self.route_sparse(&SparsePreference::from_dense(p))
    }
}

/// Splits `points` into `b` nonempty cells around `b` distinct random centers.
/// Returns the rule, the cells as point indices, and the number of distance
/// evaluations spent.
pub(crate) fn split_sparse(
    points: &[&SparsePreference],
    b: usize,
    kind: DistanceKind,
    rng: &mut Rng,
) -> (VoronoiRule, Vec<Vec<usize>>, u64) {
    debug_assert!(b >= 1 && points.len() >= b);
    let picks = index::sample(rng, points.len(), b).into_vec();
    let mut center_slot = vec![None; points.len()];
    for (slot, &i) in picks.iter().enumerate() {
        center_slot[i] = Some(slot);
    }
    let rule = VoronoiRule {
        centers: picks.iter().map(|&i| points[i].clone()).collect(),
        kind,
    };
    let mut cells = vec![Vec::new(); b];
    let mut evaluations = 0u64;
    for (i, p) in points.iter().enumerate() {
        let cell = match center_slot[i] {
            Some(slot) => slot,
            None => {
                evaluations += b as u64;
                rule.route_sparse(p)
            }
        };
        cells[cell].push(i);
    }
    (rule, cells, evaluations)
}

/// Voronoi split of `points` into `b` nonempty cells.
pub fn voronoi_split(
    points: &[PreferenceVector],
    b: usize,
    kind: DistanceKind,
    rng: &mut Rng,
) -> Result<(VoronoiRule, Vec<Vec<usize>>)> {
    if b == 0 || points.len() < b {
        return Err(Error::config(format!(
            "voronoi split needs at least b = {b} points, got {}",
            points.len()
        )));
    }
    let sparse: Vec<_> = points.iter().map(SparsePreference::from_dense).collect();
    let refs: Vec<_> = sparse.iter().collect();
    let (rule, cells, _) = split_sparse(&refs, b, kind, rng);
    Ok((rule, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    fn pv(v: &[f64]) -> PreferenceVector {
        PreferenceVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn b_equal_to_len_gives_singletons() {
        let pts: Vec<_> = (0..6).map(|i| pv(&[i as f64 / 6.0, 1.0 - i as f64 / 6.0])).collect();
        let (_, cells) = voronoi_split(&pts, 6, DistanceKind::Ruzicka, &mut seeded_rng(1)).unwrap();
        assert!(cells.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn too_few_points_is_an_error() {
        let pts = vec![pv(&[0.5]), pv(&[0.1])];
        assert!(voronoi_split(&pts, 3, DistanceKind::Tanimoto, &mut seeded_rng(1)).is_err());
    }

    #[test]
    fn identical_points_fall_in_first_cell() {
        let pts = vec![pv(&[0.4, 0.2, 0.0]); 10];
        let (_, cells) = voronoi_split(&pts, 3, DistanceKind::Ruzicka, &mut seeded_rng(5)).unwrap();
        // Centers keep their own cells; every other point ties and goes to cell 0.
        assert_eq!(cells[0].len(), 8);
        assert_eq!(cells[1].len(), 1);
        assert_eq!(cells[2].len(), 1);
    }

    #[test]
    fn separated_clusters_give_pure_cells() {
        let a: Vec<_> = (0..10).map(|i| pv(&[1.0, 0.9, 0.1 * (i % 3) as f64, 0.0, 0.0])).collect();
        let b: Vec<_> = (0..10).map(|i| pv(&[0.0, 0.0, 0.1 * (i % 4) as f64, 0.8, 1.0])).collect();
        let pts: Vec<_> = a.into_iter().chain(b).collect();
        let mut rng = seeded_rng(2);
        let mut checked = 0;
        while checked < 20 {
            let (rule, cells) = voronoi_split(&pts, 2, DistanceKind::Ruzicka, &mut rng).unwrap();
            let c0 = &rule.centers()[0];
            let c1 = &rule.centers()[1];
            // Only draws with one center per cluster are informative.
            if (c0.to_dense().values()[0] > 0.5) == (c1.to_dense().values()[0] > 0.5) {
                continue;
            }
            checked += 1;
            for cell in &cells {
                let first = cell[0] < 10;
                assert!(cell.iter().all(|&i| (i < 10) == first));
            }
        }
    }

    #[test]
    fn cells_are_nonempty_and_exhaustive() {
        let mut rng = seeded_rng(9);
        let pts: Vec<_> = (0..40)
            .map(|i| pv(&[(i % 5) as f64 / 5.0, (i % 7) as f64 / 7.0, 0.0, (i % 2) as f64]))
            .collect();
        for kind in [DistanceKind::Ruzicka, DistanceKind::Tanimoto, DistanceKind::Jaccard] {
            let (_, cells) = voronoi_split(&pts, 4, kind, &mut rng).unwrap();
            assert!(cells.iter().all(|c| !c.is_empty()));
            assert_eq!(cells.iter().map(Vec::len).sum::<usize>(), 40);
        }
    }
}
