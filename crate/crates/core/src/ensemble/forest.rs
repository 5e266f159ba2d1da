use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tree::{grow_classifier, FeatureSampling, GrowParams, Sample, TrainView, TreeNode};
use super::{argmax, training_view, Classifier, TrainConfig, VoteRule};
use crate::dataset::{Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::ingest::TaskLabel;

#[derive(Clone, Debug, PartialEq)]
pub struct ForestModel {
    pub kind: Classifier,
    pub trees: Vec<TreeNode>,
    pub classes: Vec<TaskLabel>,
    pub schema: Vec<String>,
    pub seed: u64,
    pub config: TrainConfig,
}

/// RNG for tree `index`: the seed picks the key, the tree index the stream.
pub(crate) fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn bootstrap(n: usize, rng: &mut ChaCha8Rng) -> Vec<Sample> {
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .filter(|&(_, w)| w > 0)
        .map(|(row, weight)| Sample { row, weight })
        .collect()
}

fn grow_forest(view: &TrainView, sampling: FeatureSampling, cfg: &TrainConfig) -> Vec<TreeNode> {
    let params = GrowParams {
        max_depth: cfg.max_depth,
        min_samples_split: cfg.min_samples_split,
    };
    (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(cfg.seed, t);
            let mut samples = if cfg.bootstrap {
                bootstrap(view.n_rows(), &mut rng)
            } else {
                (0..view.n_rows())
                    .map(|row| Sample { row, weight: 1 })
                    .collect()
            };
            grow_classifier(view, &mut samples, sampling, &params, &mut rng)
        })
        .collect()
}

fn train_forest(
    kind: Classifier,
    d: &Dataset,
    split: &SplitPlan,
    cfg: &TrainConfig,
) -> Result<ForestModel> {
    cfg.validate()?;
    let (view, classes) = training_view(d, split)?;
    let p = view.n_features;
    let sampling = match kind {
        Classifier::RandomForest => {
            let mtry = cfg
                .mtry
                .unwrap_or_else(|| ((p as f64).sqrt().floor() as usize).max(1));
            if mtry > p {
                return Err(Error::Config(format!(
                    "mtry {mtry} exceeds feature count {p}"
                )));
            }
            FeatureSampling::PerSplit(mtry)
        }
        _ => FeatureSampling::All,
    };
    Ok(ForestModel {
        kind,
        trees: grow_forest(&view, sampling, cfg),
        classes,
        schema: d.schema.clone(),
        seed: cfg.seed,
        config: cfg.clone(),
    })
}

/// Bootstrap-aggregated CART trees, every feature considered at each split.
pub fn train_bagging(d: &Dataset, split: &SplitPlan, cfg: &TrainConfig) -> Result<ForestModel> {
    train_forest(Classifier::Bagging, d, split, cfg)
}

/// Bagging plus `mtry` features drawn independently at every split.
pub fn train_random_forest(
    d: &Dataset,
    split: &SplitPlan,
    cfg: &TrainConfig,
) -> Result<ForestModel> {
    train_forest(Classifier::RandomForest, d, split, cfg)
}

impl ForestModel {
    pub(crate) fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let c = self.classes.len();
        let mut acc = vec![0.0; c];
        for tree in &self.trees {
            let TreeNode::Counts { counts } = tree.leaf_for(x) else {
                unreachable!("forest leaves carry class counts")
            };
            match self.config.vote {
                VoteRule::Average => {
                    let total: u32 = counts.iter().sum();
                    for (a, &n) in acc.iter_mut().zip(counts) {
                        *a += n as f64 / total as f64;
                    }
                }
                VoteRule::Majority => {
                    let freq: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
                    acc[argmax(&freq)] += 1.0;
                }
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}
