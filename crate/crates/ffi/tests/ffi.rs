use std::ffi::{CStr, CString};
use std::ptr;

use eegsweep::pipeline::{build_dataset, FeatureConfig};
use eegsweep::synth::{default_profiles, generate_study, SynthConfig};
use eegsweep_ffi::*;
use tempfile::TempDir;

fn features_file(dir: &TempDir) -> CString {
    let cfg = SynthConfig {
        n_subjects: 2,
        duration_s: 8.0,
        ..Default::default()
    };
    let d = build_dataset(
        &generate_study(&default_profiles(), &cfg).unwrap(),
        &FeatureConfig::default(),
    )
    .unwrap();
    let path = dir.path().join("features.csv");
    std::fs::write(&path, d.to_csv()).unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = eeg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn train_predict_evaluate_and_reload() {
    let dir = TempDir::new().unwrap();
    let path = features_file(&dir);
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(eeg_dataset_read_csv(path.as_ptr(), &mut ds), EegStatus::Ok);
        let (mut rows, mut cols) = (0usize, 0usize);
        assert_eq!(eeg_dataset_shape(ds, &mut rows, &mut cols), EegStatus::Ok);
        assert_eq!((rows, cols), (110, EEG_N_FEATURES));

        let opts = EegTrainOptions {
            n_trees: 15,
            max_depth: 0,
            mtry: 0,
            seed: 3,
        };
        let mut model = ptr::null_mut();
        assert_eq!(
            eeg_model_train(ds, EegClassifier::RandomForest, 2, &opts, &mut model),
            EegStatus::Ok
        );

        let mut m = EegMetrics::default();
        assert_eq!(eeg_evaluate(model, ds, 2, &mut m), EegStatus::Ok);
        assert_eq!(m.n_test, 55);
        assert!((0.0..=1.0).contains(&m.accuracy));

        let x = [1.0; EEG_N_FEATURES];
        let mut proba = [0.0; EEG_N_LABELS];
        assert_eq!(
            eeg_model_predict_proba(model, x.as_ptr(), x.len(), proba.as_mut_ptr()),
            EegStatus::Ok
        );
        assert!((proba.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut label = 99u32;
        assert_eq!(
            eeg_model_predict(model, x.as_ptr(), x.len(), &mut label),
            EegStatus::Ok
        );
        assert!((label as usize) < EEG_N_LABELS);

        let saved = CString::new(dir.path().join("m.json").to_str().unwrap()).unwrap();
        assert_eq!(eeg_model_save_json(model, saved.as_ptr()), EegStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(
            eeg_model_load_json(saved.as_ptr(), &mut loaded),
            EegStatus::Ok
        );
        let mut m2 = EegMetrics::default();
        assert_eq!(eeg_evaluate(loaded, ds, 2, &mut m2), EegStatus::Ok);
        assert_eq!(m, m2);

        eeg_model_free(loaded);
        eeg_model_free(model);
        eeg_dataset_free(ds);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let dir = TempDir::new().unwrap();
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            eeg_dataset_read_csv(ptr::null(), &mut ds),
            EegStatus::NullPointer
        );
        assert!(last_error().contains("path"));

        let missing = CString::new(dir.path().join("none.csv").to_str().unwrap()).unwrap();
        assert_eq!(
            eeg_dataset_read_csv(missing.as_ptr(), &mut ds),
            EegStatus::Io
        );

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "ordinal,subject,task,tp9_d\n0,s1,Chess,1.0\n").unwrap();
        let bad = CString::new(bad.to_str().unwrap()).unwrap();
        assert_ne!(eeg_dataset_read_csv(bad.as_ptr(), &mut ds), EegStatus::Ok);
        assert!(ds.is_null());

        let path = features_file(&dir);
        assert_eq!(eeg_dataset_read_csv(path.as_ptr(), &mut ds), EegStatus::Ok);
        let mut model = ptr::null_mut();
        assert_eq!(
            eeg_model_train(ds, EegClassifier::Bagging, 1, ptr::null(), &mut model),
            EegStatus::InvalidArgument
        );
        let opts = EegTrainOptions {
            n_trees: 0,
            max_depth: 0,
            mtry: 0,
            seed: 0,
        };
        assert_eq!(
            eeg_model_train(ds, EegClassifier::Bagging, 2, &opts, &mut model),
            EegStatus::InvalidArgument
        );
        assert_eq!(
            eeg_model_train(ds, EegClassifier::Gboost, 2, ptr::null(), &mut model),
            EegStatus::Ok
        );

        let short = [0.0; 3];
        let mut label = 0u32;
        assert_eq!(
            eeg_model_predict(model, short.as_ptr(), 3, &mut label),
            EegStatus::Data
        );
        assert!(last_error().contains("schema"));
        assert_eq!(
            eeg_model_predict(ptr::null(), short.as_ptr(), 3, &mut label),
            EegStatus::NullPointer
        );

        eeg_model_free(model);
        eeg_dataset_free(ds);
        eeg_model_free(ptr::null_mut());
        eeg_dataset_free(ptr::null_mut());
    }
}

#[test]
fn band_powers_of_a_tone() {
    let n = 1024;
    let mut samples = vec![0.0; 4 * n];
    for i in 0..n {
        samples[2 * n + i] = 2.0 * (std::f64::consts::TAU * 10.0 * i as f64 / 256.0).sin();
    }
    let mut out = [0.0; EEG_N_FEATURES];
    unsafe {
        assert_eq!(
            eeg_band_powers(samples.as_ptr(), n, 256.0, out.as_mut_ptr()),
            EegStatus::Ok
        );
        // AF8, 8-12 Hz band.
        assert!((out[12] - 1.0).abs() < 1e-12);
        assert_eq!(out.iter().filter(|v| v.abs() > 1e-12).count(), 1);
        assert_eq!(
            eeg_band_powers(samples.as_ptr(), 1000, 256.0, out.as_mut_ptr()),
            EegStatus::InvalidArgument
        );
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(eeg_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
