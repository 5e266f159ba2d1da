//! Deterministic synthetic recordings built from per-task tone profiles.
//!
//! Each channel is a sum of one sinusoid per band plus white Gaussian noise.
//! With the default tones every sinusoid sits on an exact bin of a 4 s window,
//! so a noiseless tone of amplitude `A` contributes exactly `A^2 / 4` to its band.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ChannelId, MarkerEvent, MarkerKind, RawRecording, TaskLabel};
use crate::spectral::{BandDefinition, WindowConfig, N_BANDS};

/// Tone per band at 256 Hz with 1024-sample windows.
pub const DEFAULT_TONES_HZ: [f64; N_BANDS] = [2.0, 6.0, 10.0, 20.0, 40.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskProfile {
    pub task: TaskLabel,
    /// Sinusoid amplitude in µV, `[channel][band]`.
    pub amplitudes: [[f64; N_BANDS]; 4],
    pub tones_hz: [f64; N_BANDS],
}

impl TaskProfile {
    pub fn new(task: TaskLabel, amplitudes: [[f64; N_BANDS]; 4]) -> Self {
        TaskProfile {
            task,
            amplitudes,
            tones_hz: DEFAULT_TONES_HZ,
        }
    }

    pub fn silent(task: TaskLabel) -> Self {
        Self::new(task, [[0.0; N_BANDS]; 4])
    }

    /// Checks amplitudes and that each tone falls inside its default band.
    pub fn validate(&self, fs: f64) -> Result<()> {
        if self
            .amplitudes
            .iter()
            .flatten()
            .any(|a| !(a.is_finite() && *a >= 0.0))
        {
            return Err(Error::Config(format!(
                "{}: amplitudes must be finite and >= 0",
                self.task
            )));
        }
        let nyquist = fs / 2.0;
        for (band, f) in BandDefinition::defaults().iter().zip(self.tones_hz) {
            if !band.contains(f, nyquist) {
                return Err(Error::Config(format!(
                    "{}: tone {f} Hz lies outside band {}",
                    self.task,
                    band.key()
                )));
            }
        }
        Ok(())
    }

    /// True when every tone completes a whole number of cycles in `window_len` samples.
    pub fn on_bin(&self, fs: f64, window_len: usize) -> bool {
        self.tones_hz.iter().all(|f| {
            let cycles = f * window_len as f64 / fs;
            (cycles - cycles.round()).abs() < 1e-9
        })
    }
}

/// Band amplitudes shared by every default profile, `[band]`.
const BASE_AMPLITUDES: [f64; N_BANDS] = [20.0, 10.0, 8.0, 5.0, 2.5];

/// Per-task gain on top of the base, `[band]`.
const TASK_GAINS: [[f64; N_BANDS]; 5] = [
    // MSPAN
    [1.00, 1.10, 1.00, 0.95, 1.00],
    // MathProc
    [0.80, 0.85, 0.75, 0.80, 0.85],
    // BCST
    [1.35, 1.30, 1.40, 1.30, 1.25],
    // Connections
    [1.15, 1.00, 1.20, 1.15, 1.10],
    // TOL
    [1.05, 1.20, 0.90, 1.10, 1.20],
];

/// Frontal sites carry less low-frequency power than temporoparietal ones.
const CHANNEL_GAINS: [f64; 4] = [1.0, 0.85, 0.9, 1.05];

/// Five profiles with BCST the strongest overall and MathProc the weakest.
pub fn default_profiles() -> Vec<TaskProfile> {
    TaskLabel::ALL
        .iter()
        .map(|&task| {
            let gains = TASK_GAINS[task.index()];
            let amplitudes = std::array::from_fn(|c| {
                std::array::from_fn(|b| BASE_AMPLITUDES[b] * gains[b] * CHANNEL_GAINS[c])
            });
            TaskProfile::new(task, amplitudes)
        })
        .collect()
}

/// Default amplitudes on `channel` only; the other channels carry noise alone.
pub fn planted_profiles(channel: ChannelId) -> Vec<TaskProfile> {
    default_profiles()
        .into_iter()
        .map(|mut p| {
            for c in ChannelId::ALL {
                if c != channel {
                    p.amplitudes[c.index()] = [0.0; N_BANDS];
                }
            }
            p
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    /// Standard deviation of additive white noise, µV.
    pub noise_sigma: f64,
    pub n_subjects: usize,
    /// Mean rate of injected artifact markers; none when unset.
    pub marker_rate_hz: Option<f64>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            sample_rate_hz: 256.0,
            duration_s: 60.0,
            noise_sigma: 30.0,
            n_subjects: 20,
            marker_rate_hz: None,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn n_samples(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::Config(format!(
                "sample rate must be positive, got {}",
                self.sample_rate_hz
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Config(format!(
                "noise_sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        if let Some(r) = self.marker_rate_hz {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::Config(format!(
                    "marker_rate_hz must be >= 0, got {r}"
                )));
            }
        }
        if self.n_subjects == 0 {
            return Err(Error::Config("n_subjects must be at least 1".into()));
        }
        let window_len = WindowConfig::default().window_len(self.sample_rate_hz);
        if !(self.duration_s.is_finite()) || self.n_samples() < window_len {
            return Err(Error::Config(format!(
                "duration {} s is shorter than one {window_len}-sample window",
                self.duration_s
            )));
        }
        Ok(())
    }
}

pub fn subject_id(index: usize) -> String {
    format!("s{:02}", index + 1)
}

/// Independent stream for one (subject, task, slot); slots 0..4 are channels, 4 is markers.
fn stream_rng(seed: u64, subject: usize, task: TaskLabel, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((subject as u64 * 5 + task.index() as u64) * 5) + slot as u64);
    rng
}

fn markers(cfg: &SynthConfig, subject: usize, task: TaskLabel, duration: f64) -> Vec<MarkerEvent> {
    let Some(rate) = cfg.marker_rate_hz.filter(|r| *r > 0.0) else {
        return Vec::new();
    };
    let mut rng = stream_rng(cfg.seed, subject, task, 4);
    let gap = Exp::new(rate).expect("rate is positive");
    let mut out = Vec::new();
    let mut t = gap.sample(&mut rng);
    while t < duration {
        let kind = if rng.random_bool(0.5) {
            MarkerKind::Blink
        } else {
            MarkerKind::JawClench
        };
        out.push(MarkerEvent { time_s: t, kind });
        t += gap.sample(&mut rng);
    }
    out
}

pub fn generate_recording(
    profile: &TaskProfile,
    cfg: &SynthConfig,
    subject_index: usize,
) -> Result<RawRecording> {
    cfg.validate()?;
    profile.validate(cfg.sample_rate_hz)?;
    let fs = cfg.sample_rate_hz;
    let n = cfg.n_samples();
    let noise = Normal::new(0.0, cfg.noise_sigma).expect("sigma validated");
    let samples: [Vec<f64>; 4] = std::array::from_fn(|c| {
        let mut rng = stream_rng(cfg.seed, subject_index, profile.task, c);
        let phases: [f64; N_BANDS] =
            std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
        let omegas = profile.tones_hz.map(|f| std::f64::consts::TAU * f / fs);
        let amps = profile.amplitudes[c];
        (0..n)
            .map(|i| {
                let tone: f64 = (0..N_BANDS)
                    .map(|b| amps[b] * (omegas[b] * i as f64 + phases[b]).sin())
                    .sum();
                let e = if cfg.noise_sigma > 0.0 {
                    noise.sample(&mut rng)
                } else {
                    0.0
                };
                tone + e
            })
            .collect()
    });
    let duration = n as f64 / fs;
    RawRecording::new(
        subject_id(subject_index),
        profile.task,
        fs,
        samples,
        markers(cfg, subject_index, profile.task, duration),
    )
}

/// Every subject performs every task; subject-major, canonical task order.
pub fn generate_study(profiles: &[TaskProfile], cfg: &SynthConfig) -> Result<Vec<RawRecording>> {
    let mut by_task: [Option<&TaskProfile>; 5] = [None; 5];
    for p in profiles {
        if by_task[p.task.index()].replace(p).is_some() {
            return Err(Error::Config(format!(
                "duplicate profile for task {}",
                p.task
            )));
        }
    }
    let ordered: Vec<&TaskProfile> = TaskLabel::ALL
        .iter()
        .map(|t| {
            by_task[t.index()].ok_or_else(|| Error::Config(format!("no profile for task {t}")))
        })
        .collect::<Result<_>>()?;
    use rayon::prelude::*;
    (0..cfg.n_subjects * 5)
        .into_par_iter()
        .map(|i| generate_recording(ordered[i % 5], cfg, i / 5))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::reject_artifacts;
    use crate::spectral::{extract_features, segment};

    fn quiet(duration_s: f64) -> SynthConfig {
        SynthConfig {
            duration_s,
            noise_sigma: 0.0,
            n_subjects: 1,
            ..Default::default()
        }
    }

    fn first_window_powers(rec: &RawRecording) -> crate::spectral::BandPowers {
        let segs = reject_artifacts(rec, 0.5).unwrap();
        let w = &segment(&segs[0], "s", rec.task, &WindowConfig::default(), 256.0)[0];
        extract_features(w, &BandDefinition::defaults(), 256.0).unwrap()
    }

    #[test]
    fn single_tone_lands_in_its_band() {
        let mut p = TaskProfile::silent(TaskLabel::MSPAN);
        p.amplitudes[ChannelId::AF7.index()][2] = 3.0;
        let rec = generate_recording(&p, &quiet(4.0), 0).unwrap();
        let bp = first_window_powers(&rec);
        for c in ChannelId::ALL {
            for b in 0..N_BANDS {
                let v = bp.get(c, b);
                if c == ChannelId::AF7 && b == 2 {
                    assert!((v - 9.0 / 4.0).abs() < 1e-9 * 2.25, "{v}");
                } else {
                    assert!(v <= 1e-12, "{c} band {b}: {v}");
                }
            }
        }
    }

    #[test]
    fn every_band_tone_is_exact() {
        let mut p = TaskProfile::silent(TaskLabel::TOL);
        p.amplitudes = [[1.0, 2.0, 3.0, 4.0, 5.0]; 4];
        let rec = generate_recording(&p, &quiet(8.0), 0).unwrap();
        let bp = first_window_powers(&rec);
        for c in ChannelId::ALL {
            for (b, a) in [1.0f64, 2.0, 3.0, 4.0, 5.0].iter().enumerate() {
                let want = a * a / 4.0;
                assert!((bp.get(c, b) - want).abs() <= 1e-9 * want);
            }
        }
    }

    #[test]
    fn silent_profile_is_all_zero() {
        let rec =
            generate_recording(&TaskProfile::silent(TaskLabel::BCST), &quiet(4.0), 0).unwrap();
        assert!(rec.samples.iter().flatten().all(|&v| v == 0.0));
        assert!(first_window_powers(&rec).to_vec().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_and_subject_specific() {
        let p = &default_profiles()[0];
        let cfg = SynthConfig {
            duration_s: 5.0,
            seed: 9,
            ..Default::default()
        };
        let a = generate_recording(p, &cfg, 3).unwrap();
        let b = generate_recording(p, &cfg, 3).unwrap();
        let other = generate_recording(p, &cfg, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, other.samples);
        assert_eq!(other.subject_id, "s05");
    }

    #[test]
    fn study_order_and_size() {
        let cfg = SynthConfig {
            duration_s: 4.0,
            n_subjects: 1,
            ..Default::default()
        };
        let study = generate_study(&default_profiles(), &cfg).unwrap();
        let tasks: Vec<TaskLabel> = study.iter().map(|r| r.task).collect();
        assert_eq!(tasks, TaskLabel::ALL.to_vec());

        let cfg = SynthConfig {
            duration_s: 4.0,
            n_subjects: 3,
            ..Default::default()
        };
        let study = generate_study(&default_profiles(), &cfg).unwrap();
        assert_eq!(study.len(), 15);
        assert_eq!(study[5].subject_id, "s02");
        assert_eq!(study[5].task, TaskLabel::MSPAN);
    }

    #[test]
    fn default_study_dimensions() {
        let cfg = SynthConfig::default();
        assert_eq!(cfg.n_samples(), 15360);
        let w = WindowConfig::default();
        let per =
            crate::spectral::window_offsets(cfg.n_samples(), w.window_len(256.0), w.stride(256.0))
                .count();
        assert_eq!(per, 141);
        assert_eq!(per * cfg.n_subjects * 5, 14_100);
    }

    #[test]
    fn duplicate_or_missing_profiles_rejected() {
        let mut ps = default_profiles();
        ps[1].task = TaskLabel::MSPAN;
        assert!(generate_study(&ps, &SynthConfig::default()).is_err());
        assert!(generate_study(&default_profiles()[..4], &SynthConfig::default()).is_err());
    }

    #[test]
    fn profile_validation() {
        for p in default_profiles() {
            p.validate(256.0).unwrap();
            assert!(p.on_bin(256.0, 1024));
        }
        let mut p = TaskProfile::silent(TaskLabel::MSPAN);
        p.tones_hz[0] = 5.0;
        assert!(p.validate(256.0).is_err());
        p.tones_hz[0] = 2.1;
        assert!(p.validate(256.0).is_ok());
        assert!(!p.on_bin(256.0, 1024));
        p.amplitudes[0][0] = -1.0;
        assert!(p.validate(256.0).is_err());
        assert!(SynthConfig {
            duration_s: 3.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SynthConfig {
            noise_sigma: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn default_profile_ordering() {
        let total = |t: TaskLabel| -> f64 {
            default_profiles()[t.index()]
                .amplitudes
                .iter()
                .flatten()
                .map(|a| a * a)
                .sum()
        };
        let all: Vec<f64> = TaskLabel::ALL.iter().map(|&t| total(t)).collect();
        let max = all.iter().cloned().fold(f64::MIN, f64::max);
        let min = all.iter().cloned().fold(f64::MAX, f64::min);
        assert_eq!(total(TaskLabel::BCST), max);
        assert_eq!(total(TaskLabel::MathProc), min);
    }

    #[test]
    fn planted_profiles_silence_other_channels() {
        for p in planted_profiles(ChannelId::AF8) {
            for c in ChannelId::ALL {
                let silent = p.amplitudes[c.index()].iter().all(|&a| a == 0.0);
                assert_eq!(silent, c != ChannelId::AF8);
            }
        }
    }

    #[test]
    fn markers_follow_rate() {
        let cfg = SynthConfig {
            marker_rate_hz: Some(0.5),
            n_subjects: 1,
            ..Default::default()
        };
        let rec = generate_recording(&default_profiles()[2], &cfg, 0).unwrap();
        // 60 s at 0.5 Hz; Poisson count well inside these bounds.
        assert!(
            (10..=55).contains(&rec.markers.len()),
            "{}",
            rec.markers.len()
        );
        assert!(rec.markers.windows(2).all(|w| w[0].time_s <= w[1].time_s));
    }

    #[test]
    fn noise_power_matches_expectation() {
        let sigma = 4.0;
        let cfg = SynthConfig {
            noise_sigma: sigma,
            n_subjects: 4,
            duration_s: 60.0,
            seed: 3,
            ..Default::default()
        };
        let profiles: Vec<TaskProfile> = TaskLabel::ALL
            .iter()
            .map(|&t| TaskProfile::silent(t))
            .collect();
        let study = generate_study(&profiles, &cfg).unwrap();
        let wc = WindowConfig::default();
        let mut total = 0.0;
        let mut count = 0usize;
        for rec in &study {
            let segs = reject_artifacts(rec, 0.5).unwrap();
            for w in segment(&segs[0], "s", rec.task, &wc, 256.0) {
                let bp = extract_features(&w, &BandDefinition::defaults(), 256.0).unwrap();
                total += bp.values[0].iter().sum::<f64>();
                count += 1;
            }
        }
        assert!(count >= 500);
        // E|X(k)|^2 = sigma^2 / N per bin, 511 of 1024 bins in [0.5 Hz, Nyquist].
        let expected = sigma * sigma * 511.0 / 1024.0;
        let mean = total / count as f64;
        assert!((mean / expected - 1.0).abs() < 0.1, "{mean} vs {expected}");
    }
}
