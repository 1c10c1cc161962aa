use crate::embedding::SparsePreference;
use crate::hashing::{apply_split_sparse, make_split_rule, SplitRule};
use crate::Rng;

use super::voronoi::{split_sparse, VoronoiRule};
use super::{Method, OpCounts};

/// Fresh rules drawn after a RuzHash split that sends every point to one branch.
pub const DEGENERATE_SPLIT_RETRIES: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum NodeRule {
    Hash(SplitRule),
    Voronoi(VoronoiRule),
}

impl NodeRule {
    fn route(&self, p: &SparsePreference, ops: &mut OpCounts) -> usize {
        match self {
            NodeRule::Hash(rule) => {
                ops.rule_evaluations += 1;
                rule.route_sparse(p)
            }
            NodeRule::Voronoi(rule) => {
                ops.distance_evaluations += rule.branching() as u64;
                rule.route_sparse(p)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    Leaf { size: usize },
    Internal { rule: NodeRule, children: Vec<TreeNode> },
}

impl TreeNode {
    /// Length of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { children, .. } => {
                1 + children.iter().map(TreeNode::depth).max().unwrap_or(0)
            }
        }
    }

    /// Number of training points stored below this node.
    pub fn size(&self) -> usize {
        match self {
            TreeNode::Leaf { size } => *size,
            TreeNode::Internal { children, .. } => children.iter().map(TreeNode::size).sum(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { children, .. } => children.iter().map(TreeNode::leaf_count).sum(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct TreeParams {
    pub dim: usize,
    pub branching: usize,
    pub max_depth: usize,
    pub min_node_size: usize,
    pub method: Method,
}

pub(crate) struct TreeBuilder<'a> {
    pub points: &'a [SparsePreference],
    pub params: TreeParams,
    pub ops: OpCounts,
}

impl TreeBuilder<'_> {
    pub fn grow(&mut self, members: &[usize], depth: usize, rng: &mut Rng) -> TreeNode {
        let p = self.params;
        let leaf = TreeNode::Leaf {
            size: members.len(),
        };
        if members.len() <= p.min_node_size.max(1) || depth >= p.max_depth {
            return leaf;
        }
        let node_points: Vec<&SparsePreference> = members.iter().map(|&i| &self.points[i]).collect();
        let (rule, groups) = match p.method {
            Method::RuzHash => match self.hash_split(&node_points, rng) {
                Some(split) => split,
                None => return leaf,
            },
            Method::PiForest(kind) => {
                if members.len() < p.branching {
                    return leaf;
                }
                let (rule, cells, evals) = split_sparse(&node_points, p.branching, kind, rng);
                self.ops.distance_evaluations += evals;
                (NodeRule::Voronoi(rule), cells)
            }
        };
        let children = groups
            .iter()
            .map(|group| {
                let sub: Vec<usize> = group.iter().map(|&local| members[local]).collect();
                self.grow(&sub, depth + 1, rng)
            })
            .collect();
        TreeNode::Internal { rule, children }
    }

    fn hash_split(
        &mut self,
        node_points: &[&SparsePreference],
        rng: &mut Rng,
    ) -> Option<(NodeRule, Vec<Vec<usize>>)> {
        for _ in 0..=DEGENERATE_SPLIT_RETRIES {
            let rule = make_split_rule(self.params.dim, self.params.branching, rng)
                .expect("branching validated against dimension");
            let groups = apply_split_sparse(node_points.iter().copied(), &rule);
            self.ops.rule_evaluations += node_points.len() as u64;
            if groups.iter().filter(|g| !g.is_empty()).count() >= 2 {
                return Some((NodeRule::Hash(rule), groups));
            }
        }
        None
    }
}

/// Depth reached by `p` plus `log_b` of the size of the leaf it lands in.
pub(crate) fn path_height(
    p: &SparsePreference,
    root: &TreeNode,
    branching: usize,
    ops: &mut OpCounts,
) -> f64 {
    let mut node = root;
    let mut depth = 0usize;
    loop {
        match node {
            TreeNode::Leaf { size } => {
                return depth as f64 + leaf_adjustment(*size, branching);
            }
            TreeNode::Internal { rule, children } => {
                node = &children[rule.route(p, ops)];
                depth += 1;
            }
        }
    }
}

/// `log_b(max(size, 1))`: the height a balanced `b`-ary tree would still need
/// to isolate the points of an unresolved leaf.
pub fn leaf_adjustment(size: usize, branching: usize) -> f64 {
    (size.max(1) as f64).ln() / (branching as f64).ln()
}
