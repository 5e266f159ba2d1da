//! Windowing and band-power features.
//!
//! The transform is normalized with the `1/N` factor inside the sum:
//!
//! ```text
//! X(k) = (1/N) * sum_{n=0}^{N-1} x(n) * exp(-j 2 pi k n / N)
//! ```
//!
//! so a real tone `A cos(2 pi f t)` sitting exactly on bin `k` has
//! `|X(k)| = A / 2`, and its one-sided band power is `A^2 / 4`. Band power
//! sums `|X(k)|^2` over the one-sided bins `1..=N/2` only; mirrored bins are
//! not doubled and the DC bin is never counted.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ChannelId, CleanSegment, TaskLabel};

pub const N_BANDS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub window_seconds: f64,
    pub overlap_fraction: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            window_seconds: 4.0,
            overlap_fraction: 0.9,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self, fs: f64) -> Result<()> {
        if !(self.window_seconds > 0.0 && self.window_seconds.is_finite()) {
            return Err(Error::Config(format!(
                "window_seconds must be positive, got {}",
                self.window_seconds
            )));
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(Error::Config(format!(
                "overlap_fraction must lie in [0, 1), got {}",
                self.overlap_fraction
            )));
        }
        if self.window_len(fs) < 2 {
            return Err(Error::Config(
                "window must span at least two samples".into(),
            ));
        }
        Ok(())
    }

    pub fn window_len(&self, fs: f64) -> usize {
        (self.window_seconds * fs).round() as usize
    }

    /// 90% overlap of a 1024-sample window gives 102, not 102.4.
    pub fn stride(&self, fs: f64) -> usize {
        let len = self.window_len(fs) as f64;
        ((len * (1.0 - self.overlap_fraction)).round() as usize).max(1)
    }
}

/// A fixed-length block of all four channels.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub subject_id: String,
    pub task: TaskLabel,
    /// Offset into the parent recording.
    pub start_index: usize,
    /// Channel-major, canonical channel order, each `window_len` long.
    pub data: [Vec<f64>; 4],
    pub ordinal: Option<usize>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.data[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Start offsets of every full window inside a run of `len` samples.
pub fn window_offsets(len: usize, window_len: usize, stride: usize) -> impl Iterator<Item = usize> {
    let count = if window_len == 0 || len < window_len {
        0
    } else {
        (len - window_len) / stride + 1
    };
    (0..count).map(move |i| i * stride)
}

/// Cut a clean segment into overlapping windows. Windows never extend past
/// the segment; a segment shorter than one window yields nothing.
pub fn segment(
    seg: &CleanSegment,
    subject_id: &str,
    task: TaskLabel,
    cfg: &WindowConfig,
    fs: f64,
) -> Vec<Window> {
    let window_len = cfg.window_len(fs);
    let stride = cfg.stride(fs);
    window_offsets(seg.len(), window_len, stride)
        .map(|off| Window {
            subject_id: subject_id.to_string(),
            task,
            start_index: seg.start_index + off,
            data: std::array::from_fn(|c| seg.samples[c][off..off + window_len].to_vec()),
            ordinal: None,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub coefficients: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate_hz / self.len() as f64
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }

    /// `|X(k)|^2` summed over every bin, mirrored half included.
    pub fn total_power(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `|X(k)|^2` summed over `k = 1..=N/2`.
    pub fn one_sided_power(&self) -> f64 {
        self.coefficients[1..=self.len() / 2]
            .iter()
            .map(|c| c.norm_sqr())
            .sum()
    }
}

/// Fast transform with the `1/N` normalization. `x.len()` must be a power of two.
pub fn dft(x: &[f64], fs: f64) -> Result<Spectrum> {
    let n = x.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "transform length must be a power of two >= 2, got {n}"
        )));
    }
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    Ok(Spectrum {
        coefficients: buf,
        sample_rate_hz: fs,
    })
}

/// Iterative radix-2 decimation-in-time, unnormalized, forward sign.
fn fft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    // Twiddles for the largest stage; smaller stages stride through them.
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let step = n / size;
        for chunk in buf.chunks_exact_mut(size) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *b * twiddles[k * step];
                *b = *a - t;
                *a += t;
            }
        }
        size *= 2;
    }
}

/// A frequency band `[lo_hz, hi_hz)`. With `hi_hz = None` the band runs up to
/// and including the Nyquist frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandDefinition {
    pub name: String,
    pub lo_hz: f64,
    pub hi_hz: Option<f64>,
}

impl BandDefinition {
    pub fn new(name: &str, lo_hz: f64, hi_hz: Option<f64>) -> Self {
        BandDefinition {
            name: name.to_string(),
            lo_hz,
            hi_hz,
        }
    }

    /// Delta, theta, the 8-12 Hz and 12-35 Hz bands, and gamma up to Nyquist.
    ///
    /// The 8-12 Hz band is labelled beta and 12-35 Hz alpha, which is the
    /// reverse of the usual convention; features are keyed by range
    /// (`b8_12`, `b12_35`) so the naming never leaks into column identity.
    pub fn defaults() -> Vec<BandDefinition> {
        vec![
            BandDefinition::new("delta", 0.5, Some(4.0)),
            BandDefinition::new("theta", 4.0, Some(8.0)),
            BandDefinition::new("beta", 8.0, Some(12.0)),
            BandDefinition::new("alpha", 12.0, Some(35.0)),
            BandDefinition::new("gamma", 35.0, None),
        ]
    }

    /// Defaults with gamma capped below `cap_hz`, e.g. to stay clear of mains hum.
    pub fn defaults_with_gamma_cap(cap_hz: Option<f64>) -> Vec<BandDefinition> {
        let mut bands = Self::defaults();
        bands[4].hi_hz = cap_hz;
        bands
    }

    /// Column key: `d`, `t` and `g` for the outer bands, `b<lo>_<hi>` otherwise.
    pub fn key(&self) -> String {
        match self.name.as_str() {
            "delta" => "d".into(),
            "theta" => "t".into(),
            "gamma" => "g".into(),
            _ => format!(
                "b{}_{}",
                self.lo_hz,
                self.hi_hz
                    .map(|h| h.to_string())
                    .unwrap_or_else(|| "nyq".into())
            ),
        }
    }

    pub fn contains(&self, f: f64, nyquist: f64) -> bool {
        let hi = self.hi_hz.unwrap_or(nyquist);
        if hi >= nyquist {
            f >= self.lo_hz && f <= nyquist
        } else {
            f >= self.lo_hz && f < hi
        }
    }
}

/// Check that `bands` form a contiguous ascending partition within Nyquist.
pub fn validate_bands(bands: &[BandDefinition], fs: f64) -> Result<()> {
    if bands.len() != N_BANDS {
        return Err(Error::Config(format!(
            "expected {N_BANDS} bands, got {}",
            bands.len()
        )));
    }
    let nyquist = fs / 2.0;
    for (i, b) in bands.iter().enumerate() {
        let hi = b.hi_hz.unwrap_or(nyquist);
        if !(b.lo_hz >= 0.0 && b.lo_hz < hi && hi <= nyquist) {
            return Err(Error::Config(format!(
                "band {} [{}, {}) is empty or beyond Nyquist {nyquist}",
                b.name, b.lo_hz, hi
            )));
        }
        if b.hi_hz.is_none() && i + 1 != bands.len() {
            return Err(Error::Config(
                "only the last band may extend to Nyquist".into(),
            ));
        }
        if let Some(next) = bands.get(i + 1) {
            if b.hi_hz != Some(next.lo_hz) {
                return Err(Error::Config(format!(
                    "bands {} and {} are not contiguous",
                    b.name, next.name
                )));
            }
        }
    }
    Ok(())
}

/// Sum of `|X(k)|^2` over one-sided bins `1..=N/2` whose frequency falls in `band`.
pub fn band_power(s: &Spectrum, band: &BandDefinition) -> f64 {
    let nyquist = s.nyquist();
    (1..=s.len() / 2)
        .filter(|&k| band.contains(s.bin_frequency(k), nyquist))
        .map(|k| s.coefficients[k].norm_sqr())
        .sum()
}

/// Five band powers per channel, channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct BandPowers {
    pub values: [[f64; N_BANDS]; 4],
}

impl BandPowers {
    pub fn get(&self, ch: ChannelId, band: usize) -> f64 {
        self.values[ch.index()][band]
    }

    /// Flatten in feature-column order.
    pub fn to_vec(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }
}

pub fn extract_features(w: &Window, bands: &[BandDefinition], fs: f64) -> Result<BandPowers> {
    if bands.len() != N_BANDS {
        return Err(Error::InvalidArgument(format!(
            "expected {N_BANDS} bands, got {}",
            bands.len()
        )));
    }
    let mut values = [[0.0; N_BANDS]; 4];
    for (row, channel) in values.iter_mut().zip(&w.data) {
        let spectrum = dft(channel, fs)?;
        for (slot, band) in row.iter_mut().zip(bands) {
            *slot = band_power(&spectrum, band);
        }
    }
    Ok(BandPowers { values })
}

/// Feature column names, channel-major over `channels`, e.g. `af7_b8_12`.
pub fn feature_names(channels: &[ChannelId], bands: &[BandDefinition]) -> Vec<String> {
    channels
        .iter()
        .flat_map(|ch| {
            bands
                .iter()
                .map(move |b| format!("{}_{}", ch.prefix(), b.key()))
        })
        .collect()
}
