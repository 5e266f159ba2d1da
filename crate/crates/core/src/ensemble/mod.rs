//! Tree ensembles: bagging, random forest, and softmax gradient boosting.
//!
//! Every model is a pure function of `(training rows, TrainConfig)`. Forest
//! trees draw their randomness from a ChaCha stream selected by tree index
//! under the configured seed, so training is bit-reproducible regardless of
//! how many worker threads grow the trees.

mod boost;
mod forest;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::ingest::TaskLabel;

pub use boost::{train_gboost, BoostedModel};
pub use forest::{train_bagging, train_random_forest, ForestModel};
pub use tree::TreeNode;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classifier {
    Bagging,
    RandomForest,
    Gboost,
}

impl Classifier {
    pub const ALL: [Classifier; 3] = [
        Classifier::Bagging,
        Classifier::RandomForest,
        Classifier::Gboost,
    ];

    /// Name used in report rows.
    pub fn display_name(self) -> &'static str {
        match self {
            Classifier::Bagging => "Bagging Classifier",
            Classifier::RandomForest => "Random Forest",
            Classifier::Gboost => "XGBoost Classifier",
        }
    }

    /// Name used on the command line and in model files.
    pub fn key(self) -> &'static str {
        match self {
            Classifier::Bagging => "bagging",
            Classifier::RandomForest => "random_forest",
            Classifier::Gboost => "gboost",
        }
    }
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "bagging" => Ok(Classifier::Bagging),
            "random_forest" | "rf" => Ok(Classifier::RandomForest),
            "gboost" | "xgboost" => Ok(Classifier::Gboost),
            other => Err(Error::InvalidArgument(format!(
                "unknown classifier '{other}'"
            ))),
        }
    }
}

/// How forest trees are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteRule {
    /// Mean of per-tree leaf class frequencies.
    #[default]
    Average,
    /// One vote per tree for its leaf's majority class.
    Majority,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub n_trees: usize,
    /// Features per split for random forests; `None` means `floor(sqrt(p))`.
    pub mtry: Option<usize>,
    /// `None` means unlimited for forests and 6 for boosting.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub learning_rate: f64,
    pub l2_lambda: f64,
    /// Boosting rounds; `None` spends `n_trees` in total across classes.
    pub boost_rounds: Option<usize>,
    /// Draw bootstrap resamples for forest trees. Off means every tree sees
    /// the training set once.
    pub bootstrap: bool,
    pub vote: VoteRule,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_trees: 100,
            mtry: None,
            max_depth: None,
            min_samples_split: 2,
            learning_rate: 0.3,
            l2_lambda: 1.0,
            boost_rounds: None,
            bootstrap: true,
            vote: VoteRule::Average,
            seed: 0,
        }
    }
}

pub const DEFAULT_BOOST_DEPTH: usize = 6;

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be at least 2".into()));
        }
        if self.mtry == Some(0) {
            return Err(Error::Config("mtry must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!(
                "learning_rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::Config(format!(
                "l2_lambda must be >= 0, got {}",
                self.l2_lambda
            )));
        }
        Ok(())
    }
}

/// Training rows of `d` selected by `split`, with labels mapped to the
/// classes present among them.
pub(crate) fn training_view(
    d: &Dataset,
    split: &SplitPlan,
) -> Result<(tree::TrainView, Vec<TaskLabel>)> {
    if split.train.is_empty() {
        return Err(Error::Data("empty training set".into()));
    }
    if let Some(&bad) = split.train.iter().find(|&&i| i >= d.len()) {
        return Err(Error::InvalidArgument(format!(
            "split index {bad} out of range for {} rows",
            d.len()
        )));
    }
    let mut seen = [false; 5];
    for &i in &split.train {
        seen[d.rows[i].label.index()] = true;
    }
    let classes: Vec<TaskLabel> = TaskLabel::ALL
        .into_iter()
        .filter(|l| seen[l.index()])
        .collect();
    let class_of = |l: TaskLabel| classes.iter().position(|&c| c == l).expect("present");
    let p = d.n_features();
    let mut features = Vec::with_capacity(split.train.len() * p);
    let mut labels = Vec::with_capacity(split.train.len());
    for &i in &split.train {
        features.extend_from_slice(&d.rows[i].features);
        labels.push(class_of(d.rows[i].label));
    }
    Ok((
        tree::TrainView {
            features,
            labels,
            n_features: p,
            n_classes: classes.len(),
        },
        classes,
    ))
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleModel {
    Forest(ForestModel),
    Boosted(BoostedModel),
}

/// Train `kind` on the training half of `split`.
pub fn train(
    kind: Classifier,
    d: &Dataset,
    split: &SplitPlan,
    cfg: &TrainConfig,
) -> Result<EnsembleModel> {
    Ok(match kind {
        Classifier::Bagging => EnsembleModel::Forest(train_bagging(d, split, cfg)?),
        Classifier::RandomForest => EnsembleModel::Forest(train_random_forest(d, split, cfg)?),
        Classifier::Gboost => EnsembleModel::Boosted(train_gboost(d, split, cfg)?),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    format_version: u32,
    kind: Classifier,
    seed: u64,
    classes: Vec<TaskLabel>,
    schema: Vec<String>,
    config: TrainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base_score: Option<Vec<f64>>,
    trees: Vec<TreeNode>,
}

impl EnsembleModel {
    pub fn kind(&self) -> Classifier {
        match self {
            EnsembleModel::Forest(m) => m.kind,
            EnsembleModel::Boosted(_) => Classifier::Gboost,
        }
    }

    pub fn classes(&self) -> &[TaskLabel] {
        match self {
            EnsembleModel::Forest(m) => &m.classes,
            EnsembleModel::Boosted(m) => &m.classes,
        }
    }

    pub fn schema(&self) -> &[String] {
        match self {
            EnsembleModel::Forest(m) => &m.schema,
            EnsembleModel::Boosted(m) => &m.schema,
        }
    }

    pub fn n_trees(&self) -> usize {
        match self {
            EnsembleModel::Forest(m) => m.trees.len(),
            EnsembleModel::Boosted(m) => m.trees.len(),
        }
    }

    fn check_schema(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.schema().len() {
            return Err(Error::SchemaMismatch {
                expected: self.schema().len(),
                actual: features.len(),
            });
        }
        Ok(())
    }

    /// Probability per entry of [`classes`](Self::classes).
    pub fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.check_schema(features)?;
        Ok(match self {
            EnsembleModel::Forest(m) => m.predict_proba(features),
            EnsembleModel::Boosted(m) => m.predict_proba(features),
        })
    }

    pub fn predict(&self, features: &[f64]) -> Result<TaskLabel> {
        let proba = self.predict_proba(features)?;
        Ok(self.classes()[argmax(&proba)])
    }

    pub fn predict_rows(&self, d: &Dataset, indices: &[usize]) -> Result<Vec<TaskLabel>> {
        use rayon::prelude::*;
        indices
            .par_iter()
            .map(|&i| self.predict(&d.rows[i].features))
            .collect()
    }

    /// Canonical JSON; identical models serialize to identical bytes.
    pub fn to_json(&self) -> String {
        let doc = match self {
            EnsembleModel::Forest(m) => ModelDoc {
                format_version: MODEL_FORMAT_VERSION,
                kind: m.kind,
                seed: m.seed,
                classes: m.classes.clone(),
                schema: m.schema.clone(),
                config: m.config.clone(),
                base_score: None,
                trees: m.trees.clone(),
            },
            EnsembleModel::Boosted(m) => ModelDoc {
                format_version: MODEL_FORMAT_VERSION,
                kind: Classifier::Gboost,
                seed: m.seed,
                classes: m.classes.clone(),
                schema: m.schema.clone(),
                config: m.config.clone(),
                base_score: Some(m.base_score.clone()),
                trees: m.trees.clone(),
            },
        };
        serde_json::to_string(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<EnsembleModel> {
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let doc = ModelDoc::deserialize(&mut de)?;
        de.end()?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Data(format!(
                "unsupported model format_version {}",
                doc.format_version
            )));
        }
        if doc.classes.is_empty() {
            return Err(Error::Data("model has no classes".into()));
        }
        let n_classes = doc.classes.len();
        let p = doc.schema.len();
        let check_nodes = |want_counts: bool| -> Result<()> {
            fn walk(n: &TreeNode, want_counts: bool, c: usize, p: usize) -> bool {
                match n {
                    TreeNode::Split {
                        feature,
                        left,
                        right,
                        ..
                    } => {
                        *feature < p
                            && walk(left, want_counts, c, p)
                            && walk(right, want_counts, c, p)
                    }
                    TreeNode::Counts { counts } => want_counts && counts.len() == c,
                    TreeNode::Weight { .. } => !want_counts,
                }
            }
            if doc.trees.iter().all(|t| walk(t, want_counts, n_classes, p)) {
                Ok(())
            } else {
                Err(Error::Data(
                    "tree nodes inconsistent with model kind, classes or schema".into(),
                ))
            }
        };
        match doc.kind {
            Classifier::Bagging | Classifier::RandomForest => {
                check_nodes(true)?;
                Ok(EnsembleModel::Forest(ForestModel {
                    kind: doc.kind,
                    trees: doc.trees,
                    classes: doc.classes,
                    schema: doc.schema,
                    seed: doc.seed,
                    config: doc.config,
                }))
            }
            Classifier::Gboost => {
                check_nodes(false)?;
                let base_score =
                    doc.base_score
                        .filter(|b| b.len() == n_classes)
                        .ok_or_else(|| {
                            Error::Data("boosted model needs one base score per class".into())
                        })?;
                if doc.trees.len() % n_classes != 0 {
                    return Err(Error::Data(
                        "boosted tree count is not a multiple of the class count".into(),
                    ));
                }
                Ok(EnsembleModel::Boosted(BoostedModel {
                    rounds: doc.trees.len() / n_classes,
                    trees: doc.trees,
                    base_score,
                    classes: doc.classes,
                    schema: doc.schema,
                    seed: doc.seed,
                    learning_rate: doc.config.learning_rate,
                    l2_lambda: doc.config.l2_lambda,
                    config: doc.config,
                }))
            }
        }
    }
}
