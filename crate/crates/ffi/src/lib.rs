//! C ABI over the eegsweep toolkit.
//!
//! Datasets and models are opaque heap handles released with their `_free`
//! functions. Every call returns an [`EegStatus`]; on failure
//! [`eeg_last_error_message`] describes the most recent error on the calling
//! thread. Panics never cross the boundary.
//!
//! Task labels are exchanged as indices in canonical order: 0 MSPAN,
//! 1 MathProc, 2 BCST, 3 Connections, 4 TOL. Channels are ordered TP9, AF7,
//! AF8, TP10.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use eegsweep::dataset::{interval_split, Dataset};
use eegsweep::ensemble::{train, Classifier, EnsembleModel, TrainConfig};
use eegsweep::eval::evaluate;
use eegsweep::ingest::TaskLabel;
use eegsweep::spectral::{extract_features, BandDefinition, Window, N_BANDS};
use eegsweep::Error;

pub const EEG_N_LABELS: usize = 5;
pub const EEG_N_CHANNELS: usize = 4;
pub const EEG_N_FEATURES: usize = 20;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EegStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Data = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EegClassifier {
    Bagging = 0,
    RandomForest = 1,
    Gboost = 2,
}

impl From<EegClassifier> for Classifier {
    fn from(c: EegClassifier) -> Self {
        match c {
            EegClassifier::Bagging => Classifier::Bagging,
            EegClassifier::RandomForest => Classifier::RandomForest,
            EegClassifier::Gboost => Classifier::Gboost,
        }
    }
}

/// Training options. Zero in `max_depth` or `mtry` selects the default.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct EegTrainOptions {
    pub n_trees: u32,
    pub max_depth: u32,
    pub mtry: u32,
    pub seed: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EegMetrics {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub n_test: usize,
}

/// Opaque feature table.
pub struct EegDataset(Dataset);

/// Opaque trained ensemble.
pub struct EegModel(EnsembleModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(EegStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config(_) | Error::InvalidArgument(_) => EegStatus::InvalidArgument,
            Error::Io { .. } => EegStatus::Io,
            Error::Parse { .. } => EegStatus::Parse,
            Error::Data(_) | Error::SchemaMismatch { .. } | Error::Json(_) => EegStatus::Data,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(EegStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(EegStatus::InvalidArgument, message.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EegStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EegStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            EegStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("path is not UTF-8"))?;
    Ok(PathBuf::from(s))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure(EegStatus::Io, format!("{}: {e}", path.display())))
}

/// Message for the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn eeg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eeg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Load a feature table written by `eegsweep features`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn eeg_dataset_read_csv(
    path: *const c_char,
    out: *mut *mut EegDataset,
) -> EegStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = path_arg(path)?;
        let text = read_file(&path)?;
        let d =
            Dataset::from_csv(&text).map_err(|e| e.with_source_name(path.display().to_string()))?;
        *out = Box::into_raw(Box::new(EegDataset(d)));
        Ok(())
    })
}

/// # Safety
/// `ds` must come from [`eeg_dataset_read_csv`] and `rows`, `features` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eeg_dataset_shape(
    ds: *const EegDataset,
    rows: *mut usize,
    features: *mut usize,
) -> EegStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        if rows.is_null() || features.is_null() {
            return Err(null("out"));
        }
        *rows = ds.0.len();
        *features = ds.0.n_features();
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eeg_dataset_free(ds: *mut EegDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Train on the `k`-interval training rows of `ds`.
///
/// # Safety
/// `ds` must be a live dataset handle, `opts` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eeg_model_train(
    ds: *const EegDataset,
    classifier: EegClassifier,
    k: usize,
    opts: *const EegTrainOptions,
    out: *mut *mut EegModel,
) -> EegStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut cfg = TrainConfig::default();
        if let Some(o) = opts.as_ref() {
            cfg.n_trees = o.n_trees as usize;
            cfg.max_depth = (o.max_depth > 0).then_some(o.max_depth as usize);
            cfg.mtry = (o.mtry > 0).then_some(o.mtry as usize);
            cfg.seed = o.seed;
        }
        let split = interval_split(ds.0.len(), k)?;
        let model = train(classifier.into(), &ds.0, &split, &cfg)?;
        *out = Box::into_raw(Box::new(EegModel(model)));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eeg_model_load_json(
    path: *const c_char,
    out: *mut *mut EegModel,
) -> EegStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = path_arg(path)?;
        let model = EnsembleModel::from_json(&read_file(&path)?)?;
        *out = Box::into_raw(Box::new(EegModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn eeg_model_save_json(
    model: *const EegModel,
    path: *const c_char,
) -> EegStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let path = path_arg(path)?;
        std::fs::write(&path, model.0.to_json())
            .map_err(|e| Failure(EegStatus::Io, format!("{}: {e}", path.display())))
    })
}

/// Predicted label index for one feature vector of length `n`.
///
/// # Safety
/// `features` must point to `n` doubles and `label` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eeg_model_predict(
    model: *const EegModel,
    features: *const f64,
    n: usize,
    label: *mut u32,
) -> EegStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let x = slice_arg(features, n, "features")?;
        if label.is_null() {
            return Err(null("label"));
        }
        *label = model.0.predict(x)?.index() as u32;
        Ok(())
    })
}

/// Class probabilities for one feature vector, written to `proba[0..5]` in
/// canonical label order; labels the model never saw get 0.
///
/// # Safety
/// `features` must point to `n` doubles and `proba` to `EEG_N_LABELS` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn eeg_model_predict_proba(
    model: *const EegModel,
    features: *const f64,
    n: usize,
    proba: *mut f64,
) -> EegStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let x = slice_arg(features, n, "features")?;
        if proba.is_null() {
            return Err(null("proba"));
        }
        let p = model.0.predict_proba(x)?;
        let out = std::slice::from_raw_parts_mut(proba, EEG_N_LABELS);
        out.fill(0.0);
        for (label, v) in model.0.classes().iter().zip(p) {
            out[label.index()] = v;
        }
        Ok(())
    })
}

/// Score `model` on the `k`-interval test rows of `ds`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eeg_evaluate(
    model: *const EegModel,
    ds: *const EegDataset,
    k: usize,
    out: *mut EegMetrics,
) -> EegStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let split = interval_split(ds.0.len(), k)?;
        let (_, m) = evaluate(&model.0, &ds.0, &split.test)?;
        *out = EegMetrics {
            accuracy: m.accuracy,
            macro_precision: m.macro_precision,
            macro_recall: m.macro_recall,
            macro_f1: m.macro_f1,
            n_test: split.test.len(),
        };
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eeg_model_free(model: *mut EegModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Default band powers of one window. `samples` holds `EEG_N_CHANNELS`
/// channel-major runs of `n` samples each, `n` a power of two; `out`
/// receives `EEG_N_FEATURES` values in feature-column order.
///
/// # Safety
/// `samples` must point to `4 * n` doubles and `out` to `EEG_N_FEATURES` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn eeg_band_powers(
    samples: *const f64,
    n: usize,
    sample_rate_hz: f64,
    out: *mut f64,
) -> EegStatus {
    guard(|| {
        let total = n
            .checked_mul(EEG_N_CHANNELS)
            .ok_or_else(|| invalid("window too long"))?;
        let x = slice_arg(samples, total, "samples")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let w = Window {
            subject_id: String::new(),
            task: TaskLabel::MSPAN,
            start_index: 0,
            data: std::array::from_fn(|c| x[c * n..(c + 1) * n].to_vec()),
            ordinal: None,
        };
        let bands = BandDefinition::defaults();
        let values = extract_features(&w, &bands, sample_rate_hz)?.to_vec();
        debug_assert_eq!(values.len(), EEG_N_CHANNELS * N_BANDS);
        std::slice::from_raw_parts_mut(out, EEG_N_FEATURES).copy_from_slice(&values);
        Ok(())
    })
}
