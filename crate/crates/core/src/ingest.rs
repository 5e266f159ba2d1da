//! Muse Monitor CSV ingestion and marker-based artifact excision.
//!
//! A recording is four raw microvolt channels sampled at a fixed rate. The
//! Muse Monitor app writes blink and jaw-clench detections into the
//! `Elements` column; those become [`MarkerEvent`]s, and
//! [`reject_artifacts`] cuts a symmetric span around each one.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 256.0;
pub const DEFAULT_EXCLUSION_RADIUS_S: f64 = 0.5;

/// Headset electrode, in canonical order TP9, AF7, AF8, TP10.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChannelId {
    TP9,
    AF7,
    AF8,
    TP10,
}

impl ChannelId {
    pub const ALL: [ChannelId; 4] = [
        ChannelId::TP9,
        ChannelId::AF7,
        ChannelId::AF8,
        ChannelId::TP10,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelId::TP9 => "TP9",
            ChannelId::AF7 => "AF7",
            ChannelId::AF8 => "AF8",
            ChannelId::TP10 => "TP10",
        }
    }

    /// Lower-case prefix used in feature column names.
    pub fn prefix(self) -> &'static str {
        match self {
            ChannelId::TP9 => "tp9",
            ChannelId::AF7 => "af7",
            ChannelId::AF8 => "af8",
            ChannelId::TP10 => "tp10",
        }
    }

    fn raw_column(self) -> &'static str {
        match self {
            ChannelId::TP9 => "RAW_TP9",
            ChannelId::AF7 => "RAW_AF7",
            ChannelId::AF8 => "RAW_AF8",
            ChannelId::TP10 => "RAW_TP10",
        }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown channel '{s}'")))
    }
}

/// Cognitive task performed during a recording. The declaration order is the
/// canonical class order used for tie-breaking and report rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskLabel {
    MSPAN,
    MathProc,
    BCST,
    Connections,
    TOL,
}

impl TaskLabel {
    pub const ALL: [TaskLabel; 5] = [
        TaskLabel::MSPAN,
        TaskLabel::MathProc,
        TaskLabel::BCST,
        TaskLabel::Connections,
        TaskLabel::TOL,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskLabel::MSPAN => "MSPAN",
            TaskLabel::MathProc => "MathProc",
            TaskLabel::BCST => "BCST",
            TaskLabel::Connections => "Connections",
            TaskLabel::TOL => "TOL",
        }
    }
}

impl fmt::Display for TaskLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskLabel::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown task label '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkerKind {
    Blink,
    JawClench,
}

impl MarkerKind {
    pub fn muse_token(self) -> &'static str {
        match self {
            MarkerKind::Blink => "/muse/elements/blink",
            MarkerKind::JawClench => "/muse/elements/jaw_clench",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkerEvent {
    /// Seconds from the first sample.
    pub time_s: f64,
    pub kind: MarkerKind,
}

/// One subject x task session: four equal-length channels plus artifact markers.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRecording {
    pub subject_id: String,
    pub task: TaskLabel,
    pub sample_rate_hz: f64,
    /// Channel-major, canonical channel order.
    pub samples: [Vec<f64>; 4],
    /// Sorted by time.
    pub markers: Vec<MarkerEvent>,
}

impl RawRecording {
    pub fn new(
        subject_id: impl Into<String>,
        task: TaskLabel,
        sample_rate_hz: f64,
        samples: [Vec<f64>; 4],
        mut markers: Vec<MarkerEvent>,
    ) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let n = samples[0].len();
        if samples.iter().any(|c| c.len() != n) {
            return Err(Error::Data("channel sequences differ in length".into()));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite sample value".into()));
        }
        let duration = n as f64 / sample_rate_hz;
        if markers
            .iter()
            .any(|m| !(m.time_s >= 0.0 && m.time_s <= duration))
        {
            return Err(Error::Data("marker outside recording span".into()));
        }
        markers.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
        Ok(RawRecording {
            subject_id: subject_id.into(),
            task,
            sample_rate_hz,
            samples,
            markers,
        })
    }

    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }

    pub fn channel(&self, ch: ChannelId) -> &[f64] {
        &self.samples[ch.index()]
    }
}

/// A maximal artifact-free run of samples from one recording.
#[derive(Clone, Debug, PartialEq)]
pub struct CleanSegment {
    pub start_index: usize,
    pub samples: [Vec<f64>; 4],
}

impl CleanSegment {
    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Split `<subject>_<task>.csv` into its parts. The subject may itself
/// contain underscores; the task is whatever follows the last one.
pub fn labels_from_filename(path: &Path) -> Result<(String, TaskLabel)> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::InvalidArgument(format!("bad file name {}", path.display())))?;
    let (subject, task) = stem.rsplit_once('_').ok_or_else(|| {
        Error::InvalidArgument(format!(
            "{}: expected <subject>_<task>.csv naming",
            path.display()
        ))
    })?;
    if subject.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{}: empty subject id",
            path.display()
        )));
    }
    Ok((subject.to_string(), task.parse()?))
}

fn parse_timestamp(cell: &str) -> Option<f64> {
    let cell = cell.trim();
    if let Ok(v) = cell.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(cell) {
        return Some(dt.timestamp_micros() as f64 / 1e6);
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(cell, fmt) {
            return Some(dt.and_utc().timestamp_micros() as f64 / 1e6);
        }
    }
    None
}

fn markers_in(cell: &str) -> impl Iterator<Item = MarkerKind> {
    let lower = cell.to_ascii_lowercase();
    let blink = lower.contains("blink").then_some(MarkerKind::Blink);
    let jaw = lower
        .contains("jaw_clench")
        .then_some(MarkerKind::JawClench);
    blink.into_iter().chain(jaw)
}

/// Parse a Muse Monitor export.
///
/// Rows missing any `RAW_*` value are dropped as samples but still
/// contribute markers. Sample times are `index / sample_rate_hz`; a marker is
/// placed at its row's timestamp relative to the first retained sample.
pub fn parse_muse_csv(
    text: &str,
    subject_id: &str,
    task: TaskLabel,
    sample_rate_hz: f64,
) -> Result<RawRecording> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(Some(1), format!("unreadable header: {e}")))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(Some(1), format!("missing required column {name}")))
    };
    let ts_col = column("TimeStamp")?;
    let raw_cols = ChannelId::ALL.map(|c| column(c.raw_column()));
    let raw_cols = {
        let mut out = [0usize; 4];
        for (slot, col) in out.iter_mut().zip(raw_cols) {
            *slot = col?;
        }
        out
    };
    let elements_col = column("Elements")?;

    let mut samples: [Vec<f64>; 4] = Default::default();
    let mut pending_markers: Vec<(f64, MarkerKind)> = Vec::new();
    let mut first_sample_ts: Option<f64> = None;
    let mut last_ts = f64::NEG_INFINITY;

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line());
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line());
        let ts_cell = record.get(ts_col).unwrap_or("");
        let ts = parse_timestamp(ts_cell)
            .ok_or_else(|| Error::parse(line, format!("unparseable timestamp '{ts_cell}'")))?;
        if ts < last_ts {
            return Err(Error::parse(line, "timestamps are not monotonic"));
        }
        last_ts = ts;

        let mut values = [0.0f64; 4];
        let mut complete = true;
        for (value, &col) in values.iter_mut().zip(&raw_cols) {
            match record.get(col).filter(|c| !c.is_empty()) {
                None => complete = false,
                Some(cell) => {
                    *value = cell
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| {
                            Error::parse(line, format!("unparseable numeric cell '{cell}'"))
                        })?;
                }
            }
        }
        if complete {
            first_sample_ts.get_or_insert(ts);
            for (channel, v) in samples.iter_mut().zip(values) {
                channel.push(v);
            }
        }
        if let Some(elements) = record.get(elements_col) {
            pending_markers.extend(markers_in(elements).map(|kind| (ts, kind)));
        }
    }

    let t0 = first_sample_ts.ok_or_else(|| Error::parse(None, "no complete data rows"))?;
    let duration = samples[0].len() as f64 / sample_rate_hz;
    let markers = pending_markers
        .into_iter()
        .map(|(ts, kind)| MarkerEvent {
            time_s: (ts - t0).clamp(0.0, duration),
            kind,
        })
        .collect();
    RawRecording::new(subject_id, task, sample_rate_hz, samples, markers)
}

/// Render a recording in the Muse CSV layout accepted by [`parse_muse_csv`].
/// Timestamps are seconds from the first sample; each marker is written onto
/// the row of its nearest sample.
pub fn write_muse_csv(rec: &RawRecording) -> String {
    use std::fmt::Write;

    let n = rec.len();
    let mut elements: Vec<Vec<&'static str>> = vec![Vec::new(); n];
    for m in &rec.markers {
        if n == 0 {
            break;
        }
        let idx = ((m.time_s * rec.sample_rate_hz).round() as usize).min(n - 1);
        elements[idx].push(m.kind.muse_token());
    }
    let mut out = String::with_capacity(n * 64);
    out.push_str("TimeStamp,RAW_TP9,RAW_AF7,RAW_AF8,RAW_TP10,Elements\n");
    for (i, tokens) in elements.iter().enumerate() {
        let t = i as f64 / rec.sample_rate_hz;
        let _ = write!(out, "{t}");
        for ch in &rec.samples {
            let _ = write!(out, ",{}", ch[i]);
        }
        let _ = writeln!(out, ",{}", tokens.join(";"));
    }
    out
}

/// Excise `[marker - radius_s, marker + radius_s]` around every marker and
/// return the remaining maximal runs in ascending order.
pub fn reject_artifacts(rec: &RawRecording, radius_s: f64) -> Result<Vec<CleanSegment>> {
    if !(radius_s >= 0.0 && radius_s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "exclusion radius must be non-negative, got {radius_s}"
        )));
    }
    let n = rec.len();
    let fs = rec.sample_rate_hz;
    let excluded = |i: usize, m: f64| ((i as f64 / fs) - m).abs() <= radius_s;

    // Excluded index ranges [lo, hi), one per marker, then merged.
    let mut ranges: Vec<(usize, usize)> = Vec::with_capacity(rec.markers.len());
    for m in rec.markers.iter().map(|m| m.time_s) {
        // Search window padded by one sample against rounding in the products.
        let from = (((m - radius_s) * fs).floor().max(0.0) as usize)
            .saturating_sub(1)
            .min(n);
        let to = ((((m + radius_s) * fs).ceil().max(0.0) as usize) + 2).min(n);
        let mut hits = (from..to).filter(|&i| excluded(i, m));
        if let Some(lo) = hits.next() {
            let hi = hits.next_back().unwrap_or(lo) + 1;
            ranges.push((lo, hi));
        }
    }
    ranges.sort_unstable();

    let mut segments = Vec::new();
    let mut cursor = 0usize;
    let mut emit = |from: usize, to: usize| {
        if to > from {
            segments.push(CleanSegment {
                start_index: from,
                samples: std::array::from_fn(|c| rec.samples[c][from..to].to_vec()),
            });
        }
    };
    for (lo, hi) in ranges {
        if lo > cursor {
            emit(cursor, lo);
        }
        cursor = cursor.max(hi);
    }
    emit(cursor, n);
    Ok(segments)
}
