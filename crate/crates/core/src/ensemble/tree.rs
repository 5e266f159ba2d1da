//! CART growth for classification (Gini) and for second-order regression
//! trees used by boosting.
//!
//! Candidate thresholds are midpoints between consecutive distinct values of
//! the node's rows; a row goes left when `x[feature] < threshold`. Among
//! equally good splits the lowest feature index wins, then the lowest
//! threshold.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Relative slack for treating two split scores as tied.
const TIE_EPS: f64 = 1e-12;
/// Regression splits must improve the objective by more than this.
const MIN_GAIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        #[serde(rename = "f")]
        feature: usize,
        #[serde(rename = "t")]
        threshold: f64,
        #[serde(rename = "l")]
        left: Box<TreeNode>,
        #[serde(rename = "r")]
        right: Box<TreeNode>,
    },
    /// Classification leaf: (bootstrap-weighted) training count per model class.
    Counts { counts: Vec<u32> },
    /// Regression leaf of a boosting tree.
    Weight {
        #[serde(rename = "w")]
        weight: f64,
    },
}

impl TreeNode {
    pub fn leaf_for(&self, x: &[f64]) -> &TreeNode {
        let mut node = self;
        while let TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } = node
        {
            node = if x[*feature] < *threshold {
                left
            } else {
                right
            };
        }
        node
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
            _ => 0,
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
            _ => 1,
        }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, TreeNode::Split { .. })
    }
}

/// Dense row-major training matrix with class indices.
#[derive(Clone, Debug)]
pub struct TrainView {
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
    pub n_features: usize,
    pub n_classes: usize,
}

impl TrainView {
    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[row * self.n_features + feature]
    }
}

/// A training row and how many times it was drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sample {
    pub row: usize,
    pub weight: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

/// Which features a node may split on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureSampling {
    All,
    /// Draw this many distinct features afresh at every node.
    PerSplit(usize),
}

impl FeatureSampling {
    fn candidates(self, p: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        match self {
            FeatureSampling::PerSplit(m) if m < p => {
                // Partial Fisher-Yates.
                let mut pool: Vec<usize> = (0..p).collect();
                for i in 0..m {
                    let j = rng.random_range(i..p);
                    pool.swap(i, j);
                }
                pool.truncate(m);
                pool.sort_unstable();
                pool
            }
            _ => (0..p).collect(),
        }
    }
}

/// Midpoint strictly above `a` and not above `b`, for `a < b`.
fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a / 2.0 + b / 2.0;
    if mid > a && mid <= b {
        mid
    } else {
        b
    }
}

fn better(candidate: f64, best: Option<f64>) -> bool {
    match best {
        None => true,
        Some(b) => candidate > b + TIE_EPS * b.abs().max(1.0),
    }
}

/// Gini impurity decrease of splitting a node with class weights `parent`
/// into `left` and the remainder.
pub fn gini_gain(parent: &[u64], left: &[u64]) -> f64 {
    let total: u64 = parent.iter().sum();
    let wl: u64 = left.iter().sum();
    let wr = total - wl;
    if wl == 0 || wr == 0 {
        return 0.0;
    }
    let sq = |c: &mut dyn Iterator<Item = u64>| c.map(|v| (v * v) as f64).sum::<f64>();
    let parent_sq = sq(&mut parent.iter().copied());
    let left_sq = sq(&mut left.iter().copied());
    let right_sq = sq(&mut parent.iter().zip(left).map(|(p, l)| p - l));
    (left_sq / wl as f64 + right_sq / wr as f64 - parent_sq / total as f64) / total as f64
}

/// Grow a classification tree over `samples`.
pub fn grow_classifier(
    view: &TrainView,
    samples: &mut [Sample],
    sampling: FeatureSampling,
    params: &GrowParams,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    let mut scratch = Vec::with_capacity(samples.len());
    grow_class_node(view, samples, sampling, params, rng, 0, &mut scratch)
}

fn grow_class_node(
    view: &TrainView,
    samples: &mut [Sample],
    sampling: FeatureSampling,
    params: &GrowParams,
    rng: &mut ChaCha8Rng,
    depth: usize,
    scratch: &mut Vec<(f64, usize, u32)>,
) -> TreeNode {
    let c = view.n_classes;
    let mut counts = vec![0u64; c];
    for s in samples.iter() {
        counts[view.labels[s.row]] += s.weight as u64;
    }
    let total: u64 = counts.iter().sum();
    let leaf = |counts: &[u64]| TreeNode::Counts {
        counts: counts.iter().map(|&v| v as u32).collect(),
    };
    let pure = counts.iter().filter(|&&v| v > 0).count() <= 1;
    if pure
        || total < params.min_samples_split as u64
        || params.max_depth.is_some_and(|d| depth >= d)
    {
        return leaf(&counts);
    }

    let parent_sq: f64 = counts.iter().map(|&v| (v * v) as f64).sum();
    let parent_score = parent_sq / total as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut left = vec![0u64; c];
    for feature in sampling.candidates(view.n_features, rng) {
        scratch.clear();
        scratch.extend(
            samples
                .iter()
                .map(|s| (view.value(s.row, feature), view.labels[s.row], s.weight)),
        );
        scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        left.iter_mut().for_each(|v| *v = 0);
        let (mut left_sq, mut wl) = (0.0f64, 0u64);
        let mut right_sq = parent_sq;
        for i in 0..scratch.len() - 1 {
            let (value, class, w) = scratch[i];
            let w = w as u64;
            let l_old = left[class];
            let r_old = counts[class] - l_old;
            left[class] += w;
            left_sq += ((l_old + w).pow(2) - l_old.pow(2)) as f64;
            right_sq -= (r_old.pow(2) - (r_old - w).pow(2)) as f64;
            wl += w;
            let next = scratch[i + 1].0;
            if value < next {
                let score = left_sq / wl as f64 + right_sq / (total - wl) as f64;
                let gain = (score - parent_score) / total as f64;
                // Zero-gain splits are allowed on impure nodes (XOR-like layouts).
                if gain >= -MIN_GAIN && better(gain, best.map(|b| b.0)) {
                    best = Some((gain, feature, midpoint(value, next)));
                }
            }
        }
    }

    let Some((_, feature, threshold)) = best else {
        return leaf(&counts);
    };
    let split = partition(samples, |s| view.value(s.row, feature) < threshold);
    let (lo, hi) = samples.split_at_mut(split);
    let left = grow_class_node(view, lo, sampling, params, rng, depth + 1, scratch);
    let right = grow_class_node(view, hi, sampling, params, rng, depth + 1, scratch);
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Stable in-place partition; returns the number of elements satisfying `pred`.
fn partition<T: Copy>(items: &mut [T], pred: impl Fn(&T) -> bool) -> usize {
    let (yes, no): (Vec<T>, Vec<T>) = items.iter().partition(|x| pred(x));
    let n = yes.len();
    for (slot, v) in items.iter_mut().zip(yes.into_iter().chain(no)) {
        *slot = v;
    }
    n
}

/// Per-row first and second derivatives for one boosting target.
pub struct GradientTarget<'a> {
    pub grad: &'a [f64],
    pub hess: &'a [f64],
    pub l2_lambda: f64,
}

fn newton_term(g: f64, h: f64, lambda: f64) -> f64 {
    let denom = h + lambda;
    if denom > 0.0 {
        g * g / denom
    } else {
        0.0
    }
}

/// Leaf weight `-G / (H + lambda)`.
pub fn newton_weight(g: f64, h: f64, lambda: f64) -> f64 {
    let denom = h + lambda;
    if denom > 0.0 {
        -g / denom
    } else {
        0.0
    }
}

/// Grow a regression tree maximizing the second-order gain
/// `GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)`.
pub fn grow_regressor(
    view: &TrainView,
    rows: &mut [usize],
    target: &GradientTarget<'_>,
    params: &GrowParams,
) -> TreeNode {
    let mut scratch = Vec::with_capacity(rows.len());
    grow_reg_node(view, rows, target, params, 0, &mut scratch)
}

fn grow_reg_node(
    view: &TrainView,
    rows: &mut [usize],
    target: &GradientTarget<'_>,
    params: &GrowParams,
    depth: usize,
    scratch: &mut Vec<(f64, usize)>,
) -> TreeNode {
    let lambda = target.l2_lambda;
    let g_sum: f64 = rows.iter().map(|&r| target.grad[r]).sum();
    let h_sum: f64 = rows.iter().map(|&r| target.hess[r]).sum();
    let leaf = TreeNode::Weight {
        weight: newton_weight(g_sum, h_sum, lambda),
    };
    if rows.len() < params.min_samples_split || params.max_depth.is_some_and(|d| depth >= d) {
        return leaf;
    }

    let parent = newton_term(g_sum, h_sum, lambda);
    let mut best: Option<(f64, usize, f64)> = None;
    for feature in 0..view.n_features {
        scratch.clear();
        scratch.extend(rows.iter().map(|&r| (view.value(r, feature), r)));
        scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (mut gl, mut hl) = (0.0f64, 0.0f64);
        for i in 0..scratch.len() - 1 {
            let (value, r) = scratch[i];
            gl += target.grad[r];
            hl += target.hess[r];
            let next = scratch[i + 1].0;
            if value < next {
                let gain = newton_term(gl, hl, lambda)
                    + newton_term(g_sum - gl, h_sum - hl, lambda)
                    - parent;
                if gain > MIN_GAIN && better(gain, best.map(|b| b.0)) {
                    best = Some((gain, feature, midpoint(value, next)));
                }
            }
        }
    }

    let Some((_, feature, threshold)) = best else {
        return leaf;
    };
    let split = partition(rows, |&r| view.value(r, feature) < threshold);
    let (lo, hi) = rows.split_at_mut(split);
    let left = grow_reg_node(view, lo, target, params, depth + 1, scratch);
    let right = grow_reg_node(view, hi, target, params, depth + 1, scratch);
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}
