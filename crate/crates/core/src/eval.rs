//! Confusion matrices, one-vs-rest metrics, the interval sweep, the
//! per-channel study, and band-power summaries, plus their CSV renderings.
//!
//! Accuracy is `trace / total`. Precision, recall and F1 are computed per
//! class one-vs-rest and macro-averaged. A zero denominator yields 0.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::dataset::{column_channel, interval_split, Dataset};
use crate::ensemble::{train, Classifier, EnsembleModel, TrainConfig};
use crate::error::{Error, Result};
use crate::ingest::{ChannelId, TaskLabel};

/// Interval grid of the original sweep, largest first.
pub const DEFAULT_K_VALUES: [usize; 12] = [4096, 2048, 1024, 512, 256, 128, 64, 32, 16, 8, 4, 2];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<TaskLabel>,
    /// `counts[truth][predicted]`.
    pub counts: Vec<Vec<u64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OneVsRest {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn confusion(
    truth: &[TaskLabel],
    preds: &[TaskLabel],
    classes: &[TaskLabel],
) -> Result<ConfusionMatrix> {
    if truth.len() != preds.len() {
        return Err(Error::InvalidArgument(format!(
            "{} truths but {} predictions",
            truth.len(),
            preds.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("no predictions to score".into()));
    }
    let index = |l: TaskLabel| {
        classes
            .iter()
            .position(|&c| c == l)
            .ok_or_else(|| Error::InvalidArgument(format!("label {l} outside the class set")))
    };
    let mut counts = vec![vec![0u64; classes.len()]; classes.len()];
    for (&t, &p) in truth.iter().zip(preds) {
        counts[index(t)?][index(p)?] += 1;
    }
    Ok(ConfusionMatrix {
        classes: classes.to_vec(),
        counts,
    })
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn one_vs_rest(&self, class: usize) -> OneVsRest {
        let tp = self.counts[class][class];
        let row: u64 = self.counts[class].iter().sum();
        let col: u64 = self.counts.iter().map(|r| r[class]).sum();
        let fn_ = row - tp;
        let fp = col - tp;
        OneVsRest {
            tp,
            fp,
            fn_,
            tn: self.total() - tp - fp - fn_,
        }
    }

    /// Pooled TP / (TP + FP) over all classes.
    pub fn micro_precision(&self) -> f64 {
        let (tp, fp) = (0..self.classes.len())
            .map(|c| self.one_vs_rest(c))
            .fold((0, 0), |(a, b), o| (a + o.tp, b + o.fp));
        ratio(tp, tp + fp)
    }

    /// Pooled TP / (TP + FN) over all classes.
    pub fn micro_recall(&self) -> f64 {
        let (tp, fn_) = (0..self.classes.len())
            .map(|c| self.one_vs_rest(c))
            .fold((0, 0), |(a, b), o| (a + o.tp, b + o.fn_));
        ratio(tp, tp + fn_)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassScores {
    pub label: TaskLabel,
    /// One-vs-rest accuracy `(TP + TN) / total`.
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassScores>,
}

pub fn per_label_scores(cm: &ConfusionMatrix) -> Result<Vec<ClassScores>> {
    let total = cm.total();
    if total == 0 || cm.classes.is_empty() {
        return Err(Error::InvalidArgument("empty confusion matrix".into()));
    }
    Ok(cm
        .classes
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let o = cm.one_vs_rest(i);
            ClassScores {
                label,
                accuracy: ratio(o.tp + o.tn, total),
                precision: ratio(o.tp, o.tp + o.fp),
                recall: ratio(o.tp, o.tp + o.fn_),
                // Harmonic mean of precision and recall, written in counts.
                f1: ratio(2 * o.tp, 2 * o.tp + o.fp + o.fn_),
            }
        })
        .collect())
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let per_class = per_label_scores(cm)?;
    let mean =
        |f: fn(&ClassScores) -> f64| per_class.iter().map(f).sum::<f64>() / per_class.len() as f64;
    Ok(MetricsReport {
        accuracy: ratio(cm.trace(), cm.total()),
        macro_precision: mean(|c| c.precision),
        macro_recall: mean(|c| c.recall),
        macro_f1: mean(|c| c.f1),
        per_class,
    })
}

/// Predict `indices` of `d` and score them against the dataset's classes.
pub fn evaluate(
    model: &EnsembleModel,
    d: &Dataset,
    indices: &[usize],
) -> Result<(ConfusionMatrix, MetricsReport)> {
    let preds = model.predict_rows(d, indices)?;
    let truth: Vec<TaskLabel> = indices.iter().map(|&i| d.rows[i].label).collect();
    let cm = confusion(&truth, &preds, &d.classes)?;
    let report = metrics(&cm)?;
    Ok((cm, report))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub classifier: Classifier,
    pub k: usize,
    pub channels: Vec<ChannelId>,
    pub metrics: MetricsReport,
    pub confusion: ConfusionMatrix,
    pub n_train: usize,
    pub n_test: usize,
    pub wall_time_s: f64,
    pub seed: u64,
}

/// A sweep cell that could not run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedCell {
    pub k: usize,
    pub classifier: Classifier,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub results: Vec<ExperimentResult>,
    pub skipped: Vec<SkippedCell>,
}

/// Train and score one (k, classifier) cell.
pub fn run_cell(
    d: &Dataset,
    classifier: Classifier,
    k: usize,
    cfg: &TrainConfig,
) -> Result<(ExperimentResult, EnsembleModel)> {
    let started = Instant::now();
    let split = interval_split(d.len(), k)?;
    let model = train(classifier, d, &split, cfg)?;
    let (confusion, metrics) = evaluate(&model, d, &split.test)?;
    Ok((
        ExperimentResult {
            classifier,
            k,
            channels: d.channels(),
            metrics,
            confusion,
            n_train: split.train.len(),
            n_test: split.test.len(),
            wall_time_s: started.elapsed().as_secs_f64(),
            seed: cfg.seed,
        },
        model,
    ))
}

/// Cells ordered by `k` descending, then classifier display name.
fn sweep_grid(classifiers: &[Classifier], k_values: &[usize]) -> Vec<(usize, Classifier)> {
    let mut ks = k_values.to_vec();
    ks.sort_unstable_by(|a, b| b.cmp(a));
    ks.dedup();
    let mut cls = classifiers.to_vec();
    cls.sort_by_key(|c| c.display_name());
    cls.dedup();
    ks.into_iter()
        .flat_map(|k| cls.iter().map(move |&c| (k, c)))
        .collect()
}

/// Run every (k, classifier) cell, handing each trained model to `on_model`.
/// Cells whose `k` does not fit the dataset, or whose training rows cannot
/// support the classifier, are recorded in `skipped`.
pub fn run_sweep_with(
    d: &Dataset,
    classifiers: &[Classifier],
    k_values: &[usize],
    cfg: &TrainConfig,
    mut on_model: impl FnMut(&ExperimentResult, &EnsembleModel) -> Result<()>,
) -> Result<SweepOutcome> {
    let mut out = SweepOutcome::default();
    for (k, classifier) in sweep_grid(classifiers, k_values) {
        if k < 2 || k > d.len() {
            let reason = format!("k = {k} outside [2, {}]", d.len());
            log::warn!("skipping {} at k={k}: {reason}", classifier.display_name());
            out.skipped.push(SkippedCell {
                k,
                classifier,
                reason,
            });
            continue;
        }
        match run_cell(d, classifier, k, cfg) {
            Ok((result, model)) => {
                on_model(&result, &model)?;
                out.results.push(result);
            }
            Err(Error::Data(reason)) => {
                log::warn!("skipping {} at k={k}: {reason}", classifier.display_name());
                out.skipped.push(SkippedCell {
                    k,
                    classifier,
                    reason,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub fn run_sweep(
    d: &Dataset,
    classifiers: &[Classifier],
    k_values: &[usize],
    cfg: &TrainConfig,
) -> Result<SweepOutcome> {
    run_sweep_with(d, classifiers, k_values, cfg, |_, _| Ok(()))
}

/// Random forest at `k = 2` on each single channel, then on all four.
pub fn run_channel_study(d: &Dataset, cfg: &TrainConfig) -> Result<Vec<ExperimentResult>> {
    if d.channels() != ChannelId::ALL {
        return Err(Error::InvalidArgument(
            "channel study needs all four channels in the schema".into(),
        ));
    }
    let mut subsets: Vec<Vec<ChannelId>> = ChannelId::ALL.iter().map(|&c| vec![c]).collect();
    subsets.push(ChannelId::ALL.to_vec());
    subsets
        .iter()
        .map(|subset| {
            let sub = d.select_channels(subset)?;
            run_cell(&sub, Classifier::RandomForest, 2, cfg).map(|(r, _)| r)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsdCell {
    pub task: TaskLabel,
    pub channel: ChannelId,
    pub band: String,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsdBandMean {
    pub task: TaskLabel,
    pub band: String,
    pub mean: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PsdSummary {
    pub per_channel: Vec<PsdCell>,
    pub per_band: Vec<PsdBandMean>,
    /// Canonical tasks with no rows; omitted from both tables.
    pub missing_tasks: Vec<TaskLabel>,
}

/// Mean and spread of each feature column by task, and the cross-channel
/// mean of each band by task.
pub fn psd_summary(d: &Dataset) -> Result<PsdSummary> {
    let columns: Vec<(ChannelId, String)> = d
        .schema
        .iter()
        .map(|name| {
            let ch = column_channel(name)
                .ok_or_else(|| Error::Data(format!("column {name} names no channel")))?;
            let band = name[ch.prefix().len() + 1..].to_string();
            Ok((ch, band))
        })
        .collect::<Result<_>>()?;
    let mut bands: Vec<String> = Vec::new();
    for (_, b) in &columns {
        if !bands.contains(b) {
            bands.push(b.clone());
        }
    }

    let mut out = PsdSummary::default();
    for task in TaskLabel::ALL {
        let rows: Vec<&[f64]> = d
            .rows
            .iter()
            .filter(|r| r.label == task)
            .map(|r| r.features.as_slice())
            .collect();
        if rows.is_empty() {
            log::warn!("no windows for task {task}; omitted from the band-power summary");
            out.missing_tasks.push(task);
            continue;
        }
        let n = rows.len() as f64;
        let mut band_acc: Vec<(f64, usize)> = vec![(0.0, 0); bands.len()];
        for (j, (channel, band)) in columns.iter().enumerate() {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            let slot = bands
                .iter()
                .position(|b| b == band)
                .expect("collected above");
            band_acc[slot].0 += mean;
            band_acc[slot].1 += 1;
            out.per_channel.push(PsdCell {
                task,
                channel: *channel,
                band: band.clone(),
                mean,
                std: var.sqrt(),
                n: rows.len(),
            });
        }
        for (band, (sum, count)) in bands.iter().zip(band_acc) {
            out.per_band.push(PsdBandMean {
                task,
                band: band.clone(),
                mean: sum / count as f64,
            });
        }
    }
    if out.per_channel.is_empty() {
        return Err(Error::Data("no rows to summarize".into()));
    }
    Ok(out)
}

pub fn pct(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

pub fn channel_set_name(channels: &[ChannelId]) -> String {
    channels
        .iter()
        .map(|c| c.name())
        .collect::<Vec<_>>()
        .join("+")
}

pub const SWEEP_HEADER: &str = "interval,classifier,accuracy,f1,precision,recall";
pub const PER_LABEL_HEADER: &str =
    "interval,classifier,channel_set,label,accuracy,precision,recall,f1";
pub const CHANNEL_STUDY_HEADER: &str =
    "interval,classifier,channel_set,accuracy,f1,precision,recall";

/// One sweep report row, e.g. `2,Random Forest,91.07%,91.05%,91.09%,91.01%`.
pub fn sweep_row(k: usize, classifier: Classifier, m: &MetricsReport) -> String {
    format!(
        "{k},{},{},{},{},{}",
        classifier.display_name(),
        pct(m.accuracy),
        pct(m.macro_f1),
        pct(m.macro_precision),
        pct(m.macro_recall)
    )
}

pub fn sweep_csv(results: &[ExperimentResult]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in results {
        out.push_str(&sweep_row(r.k, r.classifier, &r.metrics));
        out.push('\n');
    }
    out
}

pub fn per_label_csv(results: &[ExperimentResult]) -> String {
    let mut out = format!("{PER_LABEL_HEADER}\n");
    for r in results {
        for c in &r.metrics.per_class {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.k,
                r.classifier.display_name(),
                channel_set_name(&r.channels),
                c.label,
                pct(c.accuracy),
                pct(c.precision),
                pct(c.recall),
                pct(c.f1)
            );
        }
    }
    out
}

pub fn channel_study_csv(results: &[ExperimentResult]) -> String {
    let mut out = format!("{CHANNEL_STUDY_HEADER}\n");
    for r in results {
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k,
            r.classifier.display_name(),
            channel_set_name(&r.channels),
            pct(m.accuracy),
            pct(m.macro_f1),
            pct(m.macro_precision),
            pct(m.macro_recall)
        );
    }
    out
}

pub fn psd_channel_csv(s: &PsdSummary) -> String {
    let mut out = String::from("task,channel,band,mean,std\n");
    for c in &s.per_channel {
        let _ = writeln!(
            out,
            "{},{},{},{:?},{:?}",
            c.task, c.channel, c.band, c.mean, c.std
        );
    }
    out
}

pub fn psd_band_csv(s: &PsdSummary) -> String {
    let mut out = String::from("task,band,mean\n");
    for b in &s.per_band {
        let _ = writeln!(out, "{},{},{:?}", b.task, b.band, b.mean);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureVector;
    use crate::spectral::{feature_names, BandDefinition};
    use proptest::prelude::*;
    use TaskLabel::*;

    fn cm(counts: Vec<Vec<u64>>) -> ConfusionMatrix {
        ConfusionMatrix {
            classes: TaskLabel::ALL[..counts.len()].to_vec(),
            counts,
        }
    }

    #[test]
    fn diagonal_on_perfect_predictions() {
        let t = [MSPAN, BCST, TOL, BCST];
        let m = confusion(&t, &t, &TaskLabel::ALL).unwrap();
        for (i, row) in m.counts.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    assert_eq!(v, 0);
                }
            }
        }
        assert_eq!(m.trace(), 4);
        let r = metrics(&m).unwrap();
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn direct_tally() {
        let m = confusion(
            &[MSPAN, MSPAN, MathProc],
            &[MSPAN, MathProc, MathProc],
            &[MSPAN, MathProc],
        )
        .unwrap();
        assert_eq!(m.counts, vec![vec![1, 1], vec![0, 1]]);
    }

    #[test]
    fn confusion_errors() {
        assert!(confusion(&[MSPAN], &[], &TaskLabel::ALL).is_err());
        assert!(confusion(&[], &[], &TaskLabel::ALL).is_err());
        assert!(confusion(&[TOL], &[TOL], &[MSPAN]).is_err());
        assert!(metrics(&cm(vec![vec![0, 0], vec![0, 0]])).is_err());
    }

    #[test]
    fn binary_fixture() {
        // TP=3, FN=2 on the first class; FP=1, TN=4.
        let r = metrics(&cm(vec![vec![3, 2], vec![1, 4]])).unwrap();
        let c = &r.per_class[0];
        assert_eq!(c.precision, 0.75);
        assert_eq!(c.recall, 0.6);
        assert!((c.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.accuracy, 0.7);
    }

    #[test]
    fn perfect_five_class() {
        let m = cm((0..5)
            .map(|i| (0..5).map(|j| if i == j { 7 } else { 0 }).collect())
            .collect());
        let r = metrics(&m).unwrap();
        assert_eq!(
            (r.accuracy, r.macro_precision, r.macro_recall, r.macro_f1),
            (1.0, 1.0, 1.0, 1.0)
        );
        assert!(r.per_class.iter().all(|c| c.accuracy == 1.0 && c.f1 == 1.0));
    }

    #[test]
    fn absent_class_scores_zero() {
        let m = confusion(&[MSPAN, BCST], &[MSPAN, BCST], &TaskLabel::ALL).unwrap();
        let rows = per_label_scores(&m).unwrap();
        assert_eq!(rows.len(), 5);
        let tol = &rows[TOL.index()];
        assert_eq!((tol.precision, tol.recall, tol.f1), (0.0, 0.0, 0.0));
        assert_eq!(tol.accuracy, 1.0);
    }

    #[test]
    fn table_row_rendering() {
        let m = MetricsReport {
            accuracy: 0.9107,
            macro_f1: 0.9105,
            macro_precision: 0.9109,
            macro_recall: 0.9101,
            per_class: vec![],
        };
        assert_eq!(
            sweep_row(2, Classifier::RandomForest, &m),
            "2,Random Forest,91.07%,91.05%,91.09%,91.01%"
        );
    }

    #[test]
    fn grid_order() {
        let g = sweep_grid(
            &[
                Classifier::Gboost,
                Classifier::RandomForest,
                Classifier::Bagging,
            ],
            &[2, 1024, 16],
        );
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], (1024, Classifier::Bagging));
        assert_eq!(g[1], (1024, Classifier::RandomForest));
        assert_eq!(g[2], (1024, Classifier::Gboost));
        assert_eq!(g[8], (2, Classifier::Gboost));
    }

    fn table(values: &[(TaskLabel, f64)]) -> Dataset {
        let schema = feature_names(&ChannelId::ALL, &BandDefinition::defaults());
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, &(label, v))| FeatureVector {
                features: (0..20).map(|j| v + j as f64).collect(),
                label,
                subject_id: "s".into(),
                ordinal: i,
            })
            .collect();
        Dataset::from_rows(schema, rows).unwrap()
    }

    #[test]
    fn psd_one_window_per_task() {
        let d = table(&[
            (MSPAN, 1.0),
            (MathProc, 2.0),
            (BCST, 3.0),
            (Connections, 4.0),
            (TOL, 5.0),
        ]);
        let s = psd_summary(&d).unwrap();
        assert_eq!(s.per_channel.len(), 100);
        assert!(s.missing_tasks.is_empty());
        let cell = s
            .per_channel
            .iter()
            .find(|c| c.task == BCST && c.channel == ChannelId::AF7 && c.band == "t")
            .unwrap();
        assert_eq!((cell.mean, cell.std), (3.0 + 6.0, 0.0));
        let band = s
            .per_band
            .iter()
            .find(|b| b.task == BCST && b.band == "t")
            .unwrap();
        // Columns 1, 6, 11, 16 averaged.
        assert_eq!(band.mean, 3.0 + 8.5);
        assert!(
            psd_channel_csv(&s).starts_with("task,channel,band,mean,std\nMSPAN,TP9,d,1.0,0.0\n")
        );
    }

    #[test]
    fn psd_missing_task_is_omitted() {
        let d = table(&[(MSPAN, 1.0), (MSPAN, 3.0)]);
        let s = psd_summary(&d).unwrap();
        assert_eq!(s.missing_tasks.len(), 4);
        assert_eq!(s.per_channel[0].mean, 2.0);
        assert_eq!(s.per_channel[0].std, 1.0);
    }

    #[test]
    fn sweep_skips_oversized_k() {
        let d = table(&[(MSPAN, 1.0), (TOL, 5.0), (MSPAN, 1.1), (TOL, 5.1)]);
        let out = run_sweep(
            &d,
            &[Classifier::RandomForest],
            &[2, 4096],
            &TrainConfig {
                n_trees: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.results.len(), 1);
        assert_eq!(out.skipped.len(), 1);
        assert_eq!(out.skipped[0].k, 4096);
    }

    fn random_matrix() -> impl Strategy<Value = Vec<Vec<u64>>> {
        (2usize..=5)
            .prop_flat_map(|c| prop::collection::vec(prop::collection::vec(0u64..50, c), c))
            .prop_filter("non-empty", |m| m.iter().flatten().sum::<u64>() > 0)
    }

    proptest! {
        #[test]
        fn micro_averages_equal_accuracy(m in random_matrix()) {
            let m = cm(m);
            let acc = metrics(&m).unwrap().accuracy;
            prop_assert!((m.micro_precision() - acc).abs() < 1e-12);
            prop_assert!((m.micro_recall() - acc).abs() < 1e-12);
        }

        #[test]
        fn one_vs_rest_counts_are_consistent(m in random_matrix()) {
            let m = cm(m);
            for c in 0..m.classes.len() {
                let o = m.one_vs_rest(c);
                prop_assert_eq!(o.tp + o.fp + o.fn_ + o.tn, m.total());
                prop_assert_eq!(o.tp + o.fn_, m.counts[c].iter().sum::<u64>());
            }
        }

        #[test]
        fn metrics_bounded_and_macro_is_mean(m in random_matrix()) {
            let r = metrics(&cm(m)).unwrap();
            let n = r.per_class.len() as f64;
            for v in [r.accuracy, r.macro_f1, r.macro_precision, r.macro_recall] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!((r.macro_f1 - r.per_class.iter().map(|c| c.f1).sum::<f64>() / n).abs() < 1e-12);
            prop_assert!((r.macro_recall - r.per_class.iter().map(|c| c.recall).sum::<f64>() / n).abs() < 1e-12);
        }

        #[test]
        fn per_label_matches_binary_recount(pairs in prop::collection::vec((0usize..5, 0usize..5), 1..200)) {
            let truth: Vec<TaskLabel> = pairs.iter().map(|p| TaskLabel::ALL[p.0]).collect();
            let preds: Vec<TaskLabel> = pairs.iter().map(|p| TaskLabel::ALL[p.1]).collect();
            let m = confusion(&truth, &preds, &TaskLabel::ALL).unwrap();
            let rows = per_label_scores(&m).unwrap();
            for (c, row) in rows.iter().enumerate() {
                let tp = pairs.iter().filter(|p| p.0 == c && p.1 == c).count() as f64;
                let fp = pairs.iter().filter(|p| p.0 != c && p.1 == c).count() as f64;
                let fneg = pairs.iter().filter(|p| p.0 == c && p.1 != c).count() as f64;
                let tn = pairs.len() as f64 - tp - fp - fneg;
                let prec = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
                let rec = if tp + fneg > 0.0 { tp / (tp + fneg) } else { 0.0 };
                let f1 = if prec + rec > 0.0 { 2.0 * prec * rec / (prec + rec) } else { 0.0 };
                prop_assert!((row.precision - prec).abs() < 1e-12);
                prop_assert!((row.recall - rec).abs() < 1e-12);
                prop_assert!((row.f1 - f1).abs() < 1e-12);
                prop_assert!((row.accuracy - (tp + tn) / pairs.len() as f64).abs() < 1e-12);
            }
        }
    }
}
