//! Isolation forests in the preference space.
//!
//! Both methods share the training and testing procedure: every tree is
//! grown on an independent subsample of `ψ` rows and a point's anomaly score
//! is `2^(−E[h]/c(ψ))` with `c(ψ) = log_b ψ`, where `h` is the height the
//! point reaches in each tree. They differ only in the node split:
//!
//! * [`Method::RuzHash`] routes by a [`SplitRule`](crate::hashing::SplitRule),
//!   one hash evaluation per node;
//! * [`Method::PiForest`] routes to the nearest of `b` Voronoi centers,
//!   `b` distance evaluations per node.

use std::ops::{Add, AddAssign};

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distances::DistanceKind;
use crate::embedding::{PreferenceMatrix, PreferenceVector, SparsePreference};
use crate::{derive_seed, seeded_rng, Error, Result, Rng};

mod tree;
mod voronoi;

pub use tree::{leaf_adjustment, NodeRule, TreeNode, DEGENERATE_SPLIT_RETRIES};
pub use voronoi::{voronoi_split, VoronoiRule};

use tree::{path_height, TreeBuilder, TreeParams};

const TREE_STREAM: u64 = 0x7472_6565;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "split", content = "distance")]
pub enum Method {
    RuzHash,
    #[serde(rename = "voronoi")]
    PiForest(DistanceKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    /// Number of trees `t`.
    pub trees: usize,
    /// Subsample size `ψ`; clamped to the number of points.
    pub psi: usize,
    /// Branching factor `b`.
    pub branching: usize,
    pub method: Method,
    pub seed: u64,
    /// Nodes holding at most this many points become leaves.
    pub min_node_size: usize,
}

impl ForestConfig {
    pub fn new(method: Method, trees: usize, psi: usize, branching: usize, seed: u64) -> Self {
        Self {
            trees,
            psi,
            branching,
            method,
            seed,
            min_node_size: 1,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.trees == 0 {
            return Err(Error::config("forest needs at least one tree"));
        }
        if self.psi < 2 {
            return Err(Error::config(format!("psi must be at least 2, got {}", self.psi)));
        }
        if self.branching < 2 {
            return Err(Error::config(format!(
                "branching factor must be at least 2, got {}",
                self.branching
            )));
        }
        if self.method == Method::RuzHash && self.branching > dim {
            return Err(Error::config(format!(
                "RuzHash branching factor {} exceeds preference dimension {dim}",
                self.branching
            )));
        }
        Ok(())
    }
}

/// Height limit for trees over `psi` points: the largest `d` with
/// `b^d ≤ psi`, and at least 1.
pub fn max_height(psi: usize, branching: usize) -> usize {
    assert!(branching >= 2, "branching factor must be at least 2");
    let mut depth = 0;
    let mut reach = 1usize;
    while let Some(next) = reach.checked_mul(branching).filter(|&r| r <= psi) {
        reach = next;
        depth += 1;
    }
    depth.max(1)
}

/// Normalizer `c(ψ) = log_b ψ`. A single-point subsample cannot be split;
/// its normalizer is taken as 1.
pub fn average_height(psi: usize, branching: usize) -> f64 {
    if psi < 2 {
        return 1.0;
    }
    (psi as f64).ln() / (branching as f64).ln()
}

/// Deterministic work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    /// Split-rule (hash) evaluations, one per point per RuzHash node.
    pub rule_evaluations: u64,
    /// Distance evaluations made by Voronoi nodes.
    pub distance_evaluations: u64,
}

impl Add for OpCounts {
    type Output = OpCounts;

    fn add(self, rhs: Self) -> Self {
        OpCounts {
            rule_evaluations: self.rule_evaluations + rhs.rule_evaluations,
            distance_evaluations: self.distance_evaluations + rhs.distance_evaluations,
        }
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for OpCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(OpCounts::default(), Add::add)
    }
}

#[derive(Clone, Debug)]
pub struct Forest {
    trees: Vec<TreeNode>,
    psi: usize,
    branching: usize,
    method: Method,
    dim: usize,
    train_ops: OpCounts,
}

impl Forest {
    pub fn trees(&self) -> &[TreeNode] {
        &self.trees
    }

    /// Effective subsample size, `min(ψ, n)`.
    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn train_ops(&self) -> OpCounts {
        self.train_ops
    }

    /// Per-tree heights of one point.
    pub fn heights(&self, p: &PreferenceVector) -> Result<Vec<f64>> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        let sp = SparsePreference::from_dense(p);
        let mut ops = OpCounts::default();
        Ok(self.heights_sparse(&sp, &mut ops))
    }

    fn heights_sparse(&self, p: &SparsePreference, ops: &mut OpCounts) -> Vec<f64> {
        self.trees
            .iter()
            .map(|t| path_height(p, t, self.branching, ops))
            .collect()
    }
}

/// Grows one tree over `sub`. Its height limit follows from `|sub|`.
pub fn build_tree(sub: &[PreferenceVector], cfg: &ForestConfig, rng: &mut Rng) -> Result<TreeNode> {
    let Some(first) = sub.first() else {
        return Err(Error::config("cannot build a tree over zero points"));
    };
    cfg.validate(first.dim())?;
    let sparse: Vec<_> = sub.iter().map(SparsePreference::from_dense).collect();
    let params = tree_params(cfg, first.dim(), sub.len());
    let mut builder = TreeBuilder {
        points: &sparse,
        params,
        ops: OpCounts::default(),
    };
    let members: Vec<usize> = (0..sub.len()).collect();
    Ok(builder.grow(&members, 0, rng))
}

fn tree_params(cfg: &ForestConfig, dim: usize, psi: usize) -> TreeParams {
    TreeParams {
        dim,
        branching: cfg.branching,
        max_depth: max_height(psi, cfg.branching),
        min_node_size: cfg.min_node_size,
        method: cfg.method,
    }
}

/// Trains `t` trees, each on its own subsample drawn without replacement.
/// Tree `k` uses a random stream derived from `(cfg.seed, k)`, so the forest
/// does not depend on how trees are scheduled across threads.
pub fn build_forest(data: &PreferenceMatrix, cfg: &ForestConfig) -> Result<Forest> {
    let sparse = data.to_sparse();
    build_forest_sparse(&sparse, data.dim(), cfg)
}

pub(crate) fn build_forest_sparse(
    rows: &[SparsePreference],
    dim: usize,
    cfg: &ForestConfig,
) -> Result<Forest> {
    cfg.validate(dim)?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::config("cannot build a forest over zero points"));
    }
    let psi = cfg.psi.min(n);
    let params = tree_params(cfg, dim, psi);
    let built: Vec<(TreeNode, OpCounts)> = (0..cfg.trees)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeded_rng(derive_seed(cfg.seed, TREE_STREAM, k as u64));
            let members = index::sample(&mut rng, n, psi).into_vec();
            let mut builder = TreeBuilder {
                points: rows,
                params,
                ops: OpCounts::default(),
            };
            let root = builder.grow(&members, 0, &mut rng);
            (root, builder.ops)
        })
        .collect();
    let train_ops = built.iter().map(|(_, ops)| *ops).sum();
    Ok(Forest {
        trees: built.into_iter().map(|(t, _)| t).collect(),
        psi,
        branching: cfg.branching,
        method: cfg.method,
        dim,
        train_ops,
    })
}

/// Height of `p` in one tree with branching factor `b`.
pub fn height(p: &PreferenceVector, tree: &TreeNode, branching: usize) -> f64 {
    let mut ops = OpCounts::default();
    path_height(&SparsePreference::from_dense(p), tree, branching, &mut ops)
}

/// `2^(−mean(h) / log_b ψ)`.
pub fn anomaly_score(heights: &[f64], psi: usize, branching: usize) -> f64 {
    assert!(!heights.is_empty(), "anomaly score needs at least one height");
    let mean = heights.iter().sum::<f64>() / heights.len() as f64;
    (-mean / average_height(psi, branching)).exp2()
}

pub fn score_all(data: &PreferenceMatrix, forest: &Forest) -> Result<Vec<f64>> {
    score_all_counted(data, forest).map(|(scores, _)| scores)
}

/// Scores every row and reports the work spent routing them.
pub fn score_all_counted(data: &PreferenceMatrix, forest: &Forest) -> Result<(Vec<f64>, OpCounts)> {
    if data.dim() != forest.dim {
        return Err(Error::DimensionMismatch {
            expected: forest.dim,
            got: data.dim(),
        });
    }
    Ok(score_sparse(&data.to_sparse(), forest))
}

pub(crate) fn score_sparse(rows: &[SparsePreference], forest: &Forest) -> (Vec<f64>, OpCounts) {
    let per_point: Vec<(f64, OpCounts)> = rows
        .par_iter()
        .map(|p| {
            let mut ops = OpCounts::default();
            let h = forest.heights_sparse(p, &mut ops);
            (anomaly_score(&h, forest.psi, forest.branching), ops)
        })
        .collect();
    let ops = per_point.iter().map(|(_, o)| *o).sum();
    (per_point.into_iter().map(|(s, _)| s).collect(), ops)
}
