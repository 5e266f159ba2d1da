//! Recordings to feature table: artifact rejection, windowing, band powers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{assemble, Dataset, WindowFeatures};
use crate::error::Result;
use crate::ingest::{reject_artifacts, ChannelId, RawRecording, DEFAULT_EXCLUSION_RADIUS_S};
use crate::spectral::{
    extract_features, feature_names, segment, validate_bands, BandDefinition, WindowConfig,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub window: WindowConfig,
    pub exclusion_radius_s: f64,
    pub bands: Vec<BandDefinition>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window: WindowConfig::default(),
            exclusion_radius_s: DEFAULT_EXCLUSION_RADIUS_S,
            bands: BandDefinition::defaults(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self, fs: f64) -> Result<()> {
        self.window.validate(fs)?;
        validate_bands(&self.bands, fs)?;
        if !(self.exclusion_radius_s.is_finite() && self.exclusion_radius_s >= 0.0) {
            return Err(crate::Error::Config(format!(
                "exclusion radius must be >= 0, got {}",
                self.exclusion_radius_s
            )));
        }
        Ok(())
    }
}

fn recording_windows(rec: &RawRecording, cfg: &FeatureConfig) -> Result<Vec<(usize, Vec<f64>)>> {
    let fs = rec.sample_rate_hz;
    let mut out = Vec::new();
    for seg in reject_artifacts(rec, cfg.exclusion_radius_s)? {
        for w in segment(&seg, &rec.subject_id, rec.task, &cfg.window, fs) {
            out.push((
                w.start_index,
                extract_features(&w, &cfg.bands, fs)?.to_vec(),
            ));
        }
    }
    Ok(out)
}

/// Feature table for `recordings`, ordered by subject (first appearance),
/// then recording position, then window offset. May be empty.
pub fn build_dataset(recordings: &[RawRecording], cfg: &FeatureConfig) -> Result<Dataset> {
    let schema = feature_names(&ChannelId::ALL, &cfg.bands);
    for rec in recordings {
        cfg.validate(rec.sample_rate_hz)?;
    }
    let mut subjects: Vec<&str> = Vec::new();
    let ranks: Vec<usize> = recordings
        .iter()
        .map(|r| match subjects.iter().position(|s| *s == r.subject_id) {
            Some(i) => i,
            None => {
                subjects.push(&r.subject_id);
                subjects.len() - 1
            }
        })
        .collect();
    let per_recording: Vec<Vec<(usize, Vec<f64>)>> = recordings
        .par_iter()
        .map(|r| recording_windows(r, cfg))
        .collect::<Result<_>>()?;
    let items: Vec<WindowFeatures> = per_recording
        .into_iter()
        .enumerate()
        .flat_map(|(i, windows)| {
            let rec = &recordings[i];
            let subject_rank = ranks[i];
            windows
                .into_iter()
                .map(move |(start_index, values)| WindowFeatures {
                    subject_id: rec.subject_id.clone(),
                    subject_rank,
                    recording_rank: i,
                    task: rec.task,
                    start_index,
                    values,
                })
        })
        .collect();
    if items.is_empty() {
        return Ok(Dataset {
            schema,
            rows: Vec::new(),
            classes: Vec::new(),
        });
    }
    assemble(&schema, items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{MarkerEvent, MarkerKind, TaskLabel};
    use crate::synth::{default_profiles, generate_study, SynthConfig};

    #[test]
    fn default_window_count_per_recording() {
        let cfg = SynthConfig {
            n_subjects: 2,
            duration_s: 8.0,
            ..Default::default()
        };
        let study = generate_study(&default_profiles(), &cfg).unwrap();
        let d = build_dataset(&study, &FeatureConfig::default()).unwrap();
        // floor((2048 - 1024) / 102) + 1
        assert_eq!(d.len(), 10 * 11);
        assert_eq!(d.rows[0].subject_id, "s01");
        assert_eq!(d.rows[11].label, TaskLabel::MathProc);
        assert_eq!(d.rows[55].subject_id, "s02");
        assert_eq!(d.n_features(), 20);
    }

    #[test]
    fn fully_masked_input_is_empty() {
        let rec = RawRecording::new(
            "s1",
            TaskLabel::TOL,
            256.0,
            std::array::from_fn(|_| vec![0.0; 512]),
            vec![MarkerEvent {
                time_s: 1.0,
                kind: MarkerKind::Blink,
            }],
        )
        .unwrap();
        let d = build_dataset(&[rec], &FeatureConfig::default()).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.schema.len(), 20);
    }

    #[test]
    fn subject_rank_follows_first_appearance() {
        let cfg = SynthConfig {
            n_subjects: 2,
            duration_s: 4.0,
            ..Default::default()
        };
        let mut study = generate_study(&default_profiles(), &cfg).unwrap();
        study.swap(0, 9);
        let d = build_dataset(&study, &FeatureConfig::default()).unwrap();
        let subjects: Vec<&str> = d.rows.iter().map(|r| r.subject_id.as_str()).collect();
        assert_eq!(subjects[..5], ["s02"; 5]);
        assert_eq!(subjects[5..], ["s01"; 5]);
        assert_eq!(d.rows[0].label, TaskLabel::TOL);
    }
}
