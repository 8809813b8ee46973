//! Axis-aligned threshold trees grown greedily on weighted Gini impurity.
//!
//! An internal node sends `x` left when `x[feature] <= threshold`.
//! Thresholds sit halfway between consecutive distinct sorted values. A node
//! becomes a leaf when it is pure, at `max_depth`, or when no threshold leaves
//! `min_leaf_size` samples on both sides. Splits that do not lower the
//! impurity are still taken: on XOR-like data the first split gains nothing
//! and only the second level separates the classes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classifier::DecisionFunction;
use crate::data::{Label, LabeledDataset};
use crate::error::{check_dim, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf_size: usize,
}

impl Default for TreeConfig {
    fn default() -> TreeConfig {
        TreeConfig { max_depth: 8, min_leaf_size: 1 }
    }
}

impl TreeConfig {
    pub fn stump() -> TreeConfig {
        TreeConfig { max_depth: 1, min_leaf_size: 1 }
    }

    fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::Argument("max_depth must be >= 1".into()));
        }
        if self.min_leaf_size == 0 {
            return Err(Error::Argument("min_leaf_size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf { label: Label },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Nodes in preorder; the root is `nodes[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub dim: usize,
    pub config: TreeConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub feature: usize,
    pub threshold: f64,
    pub went_left: bool,
}

pub fn fit_tree(ds: &LabeledDataset, config: TreeConfig) -> Result<DecisionTree> {
    fit_tree_weighted(ds, &vec![1.0; ds.len()], config)
}

/// Tree fit with nonnegative instance weights; impurities and leaf majorities
/// use the weights, `min_leaf_size` counts samples.
pub fn fit_tree_weighted(ds: &LabeledDataset, weights: &[f64], config: TreeConfig) -> Result<DecisionTree> {
    config.validate()?;
    if weights.len() != ds.len() {
        return Err(Error::Argument(format!("{} weights for {} samples", weights.len(), ds.len())));
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::Argument("instance weights must be nonnegative and finite".into()));
    }
    let mut builder = Builder { ds, weights, config, nodes: Vec::new() };
    let all: Vec<usize> = (0..ds.len()).collect();
    builder.grow(all, 0);
    Ok(DecisionTree { nodes: builder.nodes, dim: ds.dim(), config })
}

struct Builder<'a> {
    ds: &'a LabeledDataset,
    weights: &'a [f64],
    config: TreeConfig,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Weighted Gini impurity times total weight: `W - (P^2 + Q^2) / W`.
fn gini_mass(p: f64, q: f64) -> f64 {
    let w = p + q;
    if w > 0.0 { w - (p * p + q * q) / w } else { 0.0 }
}

impl Builder<'_> {
    fn class_weights(&self, idx: &[usize]) -> (f64, f64) {
        idx.iter().fold((0.0, 0.0), |(p, q), &i| match self.ds.label(i) {
            Label::Pos => (p + self.weights[i], q),
            Label::Neg => (p, q + self.weights[i]),
        })
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        let (p, q) = self.class_weights(&idx);
        let label = if p >= q { Label::Pos } else { Label::Neg };
        self.nodes.push(Node::Leaf { label });
        let pure = idx.iter().all(|&i| self.ds.label(i) == self.ds.label(idx[0]));
        if pure || depth >= self.config.max_depth {
            return at;
        }
        let Some(best) = self.best_split(&idx, p, q) else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.ds.row(i)[best.feature] <= best.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        at
    }

    fn best_split(&self, idx: &[usize], p_total: f64, q_total: f64) -> Option<BestSplit> {
        let m = self.config.min_leaf_size;
        let n = idx.len();
        if n < 2 * m {
            return None;
        }
        let total = p_total + q_total;
        let tol = 1e-12 * total.max(1.0);
        let mut best: Option<BestSplit> = None;
        let mut order = idx.to_vec();
        for f in 0..self.ds.dim() {
            order.sort_by(|&a, &b| self.ds.row(a)[f].total_cmp(&self.ds.row(b)[f]).then(a.cmp(&b)));
            let (mut p, mut q) = (0.0, 0.0);
            for s in 0..n - 1 {
                let i = order[s];
                match self.ds.label(i) {
                    Label::Pos => p += self.weights[i],
                    Label::Neg => q += self.weights[i],
                }
                let lo = self.ds.row(i)[f];
                let hi = self.ds.row(order[s + 1])[f];
                if lo == hi || s + 1 < m || n - s - 1 < m {
                    continue;
                }
                let imp = gini_mass(p, q) + gini_mass(p_total - p, q_total - q);
                // Strict improvement beyond rounding noise is needed to
                // replace an earlier (lower feature, lower threshold) split.
                if best.as_ref().is_none_or(|b| imp < b.impurity - tol) {
                    let mut threshold = 0.5 * (lo + hi);
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit { feature: f, threshold, impurity: imp });
                }
            }
        }
        best
    }
}

impl DecisionTree {
    pub fn leaf_for(&self, x: &[f64]) -> Result<usize> {
        check_dim(self.dim, x.len())?;
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { .. } => return Ok(at),
                Node::Split { feature, threshold, left, right } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    /// Length of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// One node per line, children indented two spaces below their parent;
    /// the left (`<=`) child comes first.
    pub fn render(&self) -> String {
        fn go(t: &DecisionTree, at: usize, depth: usize, out: &mut String) {
            let pad = "  ".repeat(depth);
            match t.nodes[at] {
                Node::Leaf { label } => {
                    let _ = writeln!(out, "{pad}leaf: {label}");
                }
                Node::Split { feature, threshold, left, right } => {
                    let _ = writeln!(out, "{pad}f{feature} <= {threshold}");
                    go(t, left, depth + 1, out);
                    go(t, right, depth + 1, out);
                }
            }
        }
        let mut out = String::new();
        go(self, 0, 0, &mut out);
        out
    }
}

pub fn tree_classify(tree: &DecisionTree, x: &[f64]) -> Result<Label> {
    match tree.nodes[tree.leaf_for(x)?] {
        Node::Leaf { label } => Ok(label),
        Node::Split { .. } => unreachable!("leaf_for stops at leaves"),
    }
}

pub fn tree_trace(tree: &DecisionTree, x: &[f64]) -> Result<Vec<TraceStep>> {
    check_dim(tree.dim, x.len())?;
    let mut steps = Vec::new();
    let mut at = 0;
    while let Node::Split { feature, threshold, left, right } = tree.nodes[at] {
        let went_left = x[feature] <= threshold;
        steps.push(TraceStep { feature, threshold, went_left });
        at = if went_left { left } else { right };
    }
    Ok(steps)
}

impl DecisionFunction for DecisionTree {
    fn dim(&self) -> usize {
        self.dim
    }
    fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(tree_classify(self, x)?.sign())
    }
}
