//! Chronologically ordered feature table, channel projection, and the
//! every-k-th-row train/test split.
//!
//! Windows overlap by 90% at the default geometry, so for small `k` each test
//! row has near-identical neighbours in the training set. The split is
//! reproduced as-is; accuracies at small `k` measure interpolation between
//! adjacent windows as much as generalization.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ChannelId, TaskLabel};

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub features: Vec<f64>,
    pub label: TaskLabel,
    pub subject_id: String,
    pub ordinal: usize,
}

/// Features of one window plus the keys that fix its chronological position.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowFeatures {
    pub subject_id: String,
    /// Position of the subject in the input.
    pub subject_rank: usize,
    /// Position of the recording in the input.
    pub recording_rank: usize,
    pub task: TaskLabel,
    pub start_index: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub schema: Vec<String>,
    /// Sorted by ordinal, ordinals `0..n`.
    pub rows: Vec<FeatureVector>,
    /// Labels present in `rows`, canonical order.
    pub classes: Vec<TaskLabel>,
}

fn present_classes<'a>(labels: impl Iterator<Item = &'a TaskLabel>) -> Vec<TaskLabel> {
    let mut seen = [false; 5];
    for l in labels {
        seen[l.index()] = true;
    }
    TaskLabel::ALL
        .into_iter()
        .filter(|l| seen[l.index()])
        .collect()
}

/// Channel encoded in a feature column name such as `af8_b12_35`.
pub fn column_channel(name: &str) -> Option<ChannelId> {
    let prefix = name.split('_').next()?;
    ChannelId::ALL.into_iter().find(|c| c.prefix() == prefix)
}

/// Order windows by (subject, recording, start offset) and number them.
pub fn assemble(schema: &[String], mut items: Vec<WindowFeatures>) -> Result<Dataset> {
    if items.is_empty() {
        return Err(Error::Data("no windows to assemble".into()));
    }
    if let Some(bad) = items.iter().find(|w| w.values.len() != schema.len()) {
        return Err(Error::Data(format!(
            "mixed feature schemas: window of {} at {} has {} values, schema has {}",
            bad.subject_id,
            bad.start_index,
            bad.values.len(),
            schema.len()
        )));
    }
    if items.iter().flat_map(|w| &w.values).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite feature value".into()));
    }
    items.sort_by_key(|w| (w.subject_rank, w.recording_rank, w.start_index));
    let rows: Vec<FeatureVector> = items
        .into_iter()
        .enumerate()
        .map(|(ordinal, w)| FeatureVector {
            features: w.values,
            label: w.task,
            subject_id: w.subject_id,
            ordinal,
        })
        .collect();
    Ok(Dataset {
        schema: schema.to_vec(),
        classes: present_classes(rows.iter().map(|r| &r.label)),
        rows,
    })
}

impl Dataset {
    /// Build from rows already in chronological order; ordinals are reassigned.
    pub fn from_rows(schema: Vec<String>, rows: Vec<FeatureVector>) -> Result<Dataset> {
        if let Some(r) = rows.iter().find(|r| r.features.len() != schema.len()) {
            return Err(Error::SchemaMismatch {
                expected: schema.len(),
                actual: r.features.len(),
            });
        }
        let rows: Vec<FeatureVector> = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| FeatureVector { ordinal: i, ..r })
            .collect();
        Ok(Dataset {
            classes: present_classes(rows.iter().map(|r| &r.label)),
            schema,
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn labels(&self) -> impl Iterator<Item = TaskLabel> + '_ {
        self.rows.iter().map(|r| r.label)
    }

    /// Channels covered by the schema, canonical order.
    pub fn channels(&self) -> Vec<ChannelId> {
        let mut present = [false; 4];
        for c in self.schema.iter().filter_map(|n| column_channel(n)) {
            present[c.index()] = true;
        }
        ChannelId::ALL
            .into_iter()
            .filter(|c| present[c.index()])
            .collect()
    }

    /// Keep only the columns of `subset`, in canonical channel order.
    pub fn select_channels(&self, subset: &[ChannelId]) -> Result<Dataset> {
        if subset.is_empty() {
            return Err(Error::InvalidArgument("channel subset is empty".into()));
        }
        let mut wanted = [false; 4];
        for c in subset {
            if std::mem::replace(&mut wanted[c.index()], true) {
                return Err(Error::InvalidArgument(format!("channel {c} listed twice")));
            }
        }
        let have = self.channels();
        if let Some(missing) = subset.iter().find(|c| !have.contains(c)) {
            return Err(Error::InvalidArgument(format!(
                "dataset has no {missing} columns"
            )));
        }
        let keep: Vec<usize> = self
            .schema
            .iter()
            .enumerate()
            .filter(|(_, n)| column_channel(n).is_some_and(|c| wanted[c.index()]))
            .map(|(i, _)| i)
            .collect();
        Ok(Dataset {
            schema: keep.iter().map(|&i| self.schema[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| FeatureVector {
                    features: keep.iter().map(|&i| r.features[i]).collect(),
                    ..r.clone()
                })
                .collect(),
            classes: self.classes.clone(),
        })
    }

    /// Z-score every feature within each subject. Constant columns become 0.
    pub fn zscore_per_subject(&self) -> Dataset {
        let p = self.n_features();
        let mut stats: HashMap<&str, (usize, Vec<f64>, Vec<f64>)> = HashMap::new();
        for r in &self.rows {
            let e = stats
                .entry(r.subject_id.as_str())
                .or_insert_with(|| (0, vec![0.0; p], vec![0.0; p]));
            e.0 += 1;
            for (s, v) in e.1.iter_mut().zip(&r.features) {
                *s += v;
            }
        }
        for (n, sum, _) in stats.values_mut() {
            for s in sum.iter_mut() {
                *s /= *n as f64;
            }
        }
        for r in &self.rows {
            let e = stats
                .get_mut(r.subject_id.as_str())
                .expect("subject seen above");
            for ((sq, mean), v) in e.2.iter_mut().zip(&e.1).zip(&r.features) {
                *sq += (v - mean).powi(2);
            }
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let (n, mean, sq) = &stats[r.subject_id.as_str()];
                let features = r
                    .features
                    .iter()
                    .zip(mean)
                    .zip(sq)
                    .map(|((v, m), s)| {
                        let sd = (s / *n as f64).sqrt();
                        if sd > 0.0 {
                            (v - m) / sd
                        } else {
                            0.0
                        }
                    })
                    .collect();
                FeatureVector {
                    features,
                    ..r.clone()
                }
            })
            .collect();
        Dataset {
            schema: self.schema.clone(),
            rows,
            classes: self.classes.clone(),
        }
    }

    /// Feature CSV: `ordinal,subject,task,<schema...>`, one row per window.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * (self.schema.len() + 2) * 20);
        out.push_str("ordinal,subject,task");
        for name in &self.schema {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{}", r.ordinal, r.subject_id, r.label);
            for v in &r.features {
                // Shortest representation that round-trips exactly.
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Dataset> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(Some(1), format!("unreadable header: {e}")))?
            .clone();
        let fixed = ["ordinal", "subject", "task"];
        if headers.len() < 4 || headers.iter().zip(fixed).any(|(h, f)| h != f) {
            return Err(Error::parse(
                Some(1),
                "feature CSV header must start with ordinal,subject,task and name at least one feature",
            ));
        }
        let schema: Vec<String> = headers.iter().skip(3).map(str::to_string).collect();
        if let Some(bad) = schema.iter().find(|n| column_channel(n).is_none()) {
            return Err(Error::parse(
                Some(1),
                format!("column '{bad}' does not name a channel"),
            ));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record =
                record.map_err(|e| Error::parse(e.position().map(|p| p.line()), e.to_string()))?;
            let line = record.position().map(|p| p.line());
            let ordinal = record[0]
                .parse::<usize>()
                .map_err(|_| Error::parse(line, format!("bad ordinal '{}'", &record[0])))?;
            let label: TaskLabel = record[2]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad task '{}'", &record[2])))?;
            let features = record
                .iter()
                .skip(3)
                .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::parse(line, "unparseable feature value"))?;
            rows.push(FeatureVector {
                features,
                label,
                subject_id: record[1].to_string(),
                ordinal,
            });
        }
        rows.sort_by_key(|r| r.ordinal);
        if rows.iter().enumerate().any(|(i, r)| r.ordinal != i) {
            return Err(Error::parse(
                None,
                "ordinals must be 0..n-1 without gaps or repeats",
            ));
        }
        Ok(Dataset {
            classes: present_classes(rows.iter().map(|r| &r.label)),
            schema,
            rows,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub k: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("split plan serializes")
    }
}

/// Rows whose index is a multiple of `k` train; the rest test.
pub fn interval_split(n: usize, k: usize) -> Result<SplitPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "interval k must be >= 2, got {k}"
        )));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "interval k = {k} exceeds row count {n}"
        )));
    }
    let (train, test) = (0..n).partition(|i| i % k == 0);
    Ok(SplitPlan { k, train, test })
}
