//! Multiclass softmax gradient boosting with Newton leaf weights.
//!
//! Each round fits one regression tree per class to `g = p_c - y_c` with
//! `h = p_c (1 - p_c)`; leaves hold `-G / (H + lambda)` and scores move by
//! `learning_rate` times the leaf weight.

use rayon::prelude::*;

use super::tree::{grow_regressor, GradientTarget, GrowParams, TreeNode};
use super::{training_view, TrainConfig, DEFAULT_BOOST_DEPTH};
use crate::dataset::{Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::ingest::TaskLabel;

#[derive(Clone, Debug, PartialEq)]
pub struct BoostedModel {
    /// Round-major: tree `r * n_classes + c` is class `c` of round `r`.
    pub trees: Vec<TreeNode>,
    pub rounds: usize,
    pub learning_rate: f64,
    pub l2_lambda: f64,
    /// Log of each class's training frequency.
    pub base_score: Vec<f64>,
    pub classes: Vec<TaskLabel>,
    pub schema: Vec<String>,
    pub seed: u64,
    pub config: TrainConfig,
}

fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum += *s;
    }
    scores.iter_mut().for_each(|s| *s /= sum);
}

fn leaf_weight(tree: &TreeNode, x: &[f64]) -> f64 {
    match tree.leaf_for(x) {
        TreeNode::Weight { weight } => *weight,
        _ => unreachable!("boosting leaves carry weights"),
    }
}

pub fn train_gboost(d: &Dataset, split: &SplitPlan, cfg: &TrainConfig) -> Result<BoostedModel> {
    cfg.validate()?;
    let (view, classes) = training_view(d, split)?;
    let c = classes.len();
    if c < 2 {
        return Err(Error::Data(
            "boosting needs at least two classes in the training rows".into(),
        ));
    }
    let n = view.n_rows();
    let rounds = cfg.boost_rounds.unwrap_or(cfg.n_trees / c);
    let params = GrowParams {
        max_depth: Some(cfg.max_depth.unwrap_or(DEFAULT_BOOST_DEPTH)),
        min_samples_split: cfg.min_samples_split,
    };

    let mut freq = vec![0usize; c];
    for &l in &view.labels {
        freq[l] += 1;
    }
    let base_score: Vec<f64> = freq.iter().map(|&f| (f as f64 / n as f64).ln()).collect();

    // Row-major n x c raw scores.
    let mut scores: Vec<f64> = (0..n).flat_map(|_| base_score.iter().copied()).collect();
    let mut trees = Vec::with_capacity(rounds * c);
    for _ in 0..rounds {
        let mut proba = scores.clone();
        proba.chunks_exact_mut(c).for_each(softmax_in_place);
        let round: Vec<TreeNode> = (0..c)
            .into_par_iter()
            .map(|class| {
                let grad: Vec<f64> = (0..n)
                    .map(|i| proba[i * c + class] - f64::from(u8::from(view.labels[i] == class)))
                    .collect();
                let hess: Vec<f64> = (0..n)
                    .map(|i| proba[i * c + class] * (1.0 - proba[i * c + class]))
                    .collect();
                let mut rows: Vec<usize> = (0..n).collect();
                let target = GradientTarget {
                    grad: &grad,
                    hess: &hess,
                    l2_lambda: cfg.l2_lambda,
                };
                grow_regressor(&view, &mut rows, &target, &params)
            })
            .collect();
        for i in 0..n {
            for (class, tree) in round.iter().enumerate() {
                scores[i * c + class] += cfg.learning_rate * leaf_weight(tree, view.row(i));
            }
        }
        trees.extend(round);
    }

    Ok(BoostedModel {
        trees,
        rounds,
        learning_rate: cfg.learning_rate,
        l2_lambda: cfg.l2_lambda,
        base_score,
        classes,
        schema: d.schema.clone(),
        seed: cfg.seed,
        config: cfg.clone(),
    })
}

impl BoostedModel {
    /// Class distribution using only the first `rounds` rounds.
    pub fn predict_proba_rounds(&self, x: &[f64], rounds: usize) -> Vec<f64> {
        let c = self.classes.len();
        let mut scores = self.base_score.clone();
        for (i, tree) in self
            .trees
            .iter()
            .take(rounds.min(self.rounds) * c)
            .enumerate()
        {
            scores[i % c] += self.learning_rate * leaf_weight(tree, x);
        }
        softmax_in_place(&mut scores);
        scores
    }

    pub(crate) fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        self.predict_proba_rounds(x, self.rounds)
    }

    /// Mean negative log-likelihood of `indices` after `rounds` rounds.
    pub fn log_loss(&self, d: &Dataset, indices: &[usize], rounds: usize) -> f64 {
        let total: f64 = indices
            .iter()
            .map(|&i| {
                let row = &d.rows[i];
                let p = self.predict_proba_rounds(&row.features, rounds);
                let k = self.classes.iter().position(|&c| c == row.label);
                -k.map(|k| p[k].max(1e-300).ln())
                    .unwrap_or(f64::NEG_INFINITY)
            })
            .sum();
        total / indices.len() as f64
    }
}
