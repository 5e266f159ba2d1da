use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn eegsweep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eegsweep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = eegsweep(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path).unwrap()
}

/// Small synthetic study plus its feature table.
fn study(dir: &Path, subjects: &str, duration: &str) {
    let raw = dir.join("raw");
    ok(&[
        "synth",
        "--subjects",
        subjects,
        "--duration",
        duration,
        "--out",
        p(&raw),
    ]);
    ok(&["features", p(&raw), "--out", p(dir)]);
}

#[test]
fn synth_writes_one_file_per_task() {
    let tmp = TempDir::new().unwrap();
    ok(&[
        "synth",
        "--subjects",
        "1",
        "--duration",
        "8",
        "--out",
        p(tmp.path()),
    ]);
    let mut names: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "s01_BCST.csv",
            "s01_Connections.csv",
            "s01_MSPAN.csv",
            "s01_MathProc.csv",
            "s01_TOL.csv"
        ]
    );
    assert_eq!(
        read(tmp.path().join("s01_TOL.csv")).lines().count(),
        1 + 2048
    );
    assert!(tmp.path().join("manifest_synth.json").exists());
}

#[test]
fn single_window_recording() {
    let tmp = TempDir::new().unwrap();
    let raw = tmp.path().join("raw");
    ok(&[
        "synth",
        "--subjects",
        "1",
        "--duration",
        "4",
        "--out",
        p(&raw),
    ]);
    ok(&[
        "features",
        p(&raw.join("s01_MSPAN.csv")),
        "--out",
        p(tmp.path()),
    ]);
    let csv = read(tmp.path().join("features.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(
        lines[0].starts_with("ordinal,subject,task,tp9_d,tp9_t,tp9_b8_12,tp9_b12_35,tp9_g,af7_d")
    );
    assert!(lines[1].starts_with("0,s01,MSPAN,"));
}

#[test]
fn fully_masked_input_gives_empty_table() {
    let tmp = TempDir::new().unwrap();
    let mut text = String::from("TimeStamp,RAW_TP9,RAW_AF7,RAW_AF8,RAW_TP10,Elements\n");
    for i in 0..600 {
        let marker = if i % 100 == 50 {
            "/muse/elements/blink"
        } else {
            ""
        };
        text.push_str(&format!("{},1,2,3,4,{marker}\n", i as f64 / 256.0));
    }
    let input = tmp.path().join("p7_TOL.csv");
    fs::write(&input, text).unwrap();
    let out = ok(&["features", p(&input), "--out", p(tmp.path())]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
    assert_eq!(read(tmp.path().join("features.csv")).lines().count(), 1);
}

#[test]
fn malformed_input_exits_two_with_location() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("s1_BCST.csv");
    fs::write(
        &input,
        "TimeStamp,RAW_TP9,RAW_AF7,RAW_AF8,RAW_TP10,Elements\n0.0,1,2,3,4,\n0.1,1,x,3,4,\n",
    )
    .unwrap();
    let out = eegsweep(&["features", p(&input), "--out", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("s1_BCST.csv:3"), "{err}");
}

#[test]
fn bad_task_name_and_missing_inputs_exit_one() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("s1_Chess.csv");
    fs::write(
        &input,
        "TimeStamp,RAW_TP9,RAW_AF7,RAW_AF8,RAW_TP10,Elements\n",
    )
    .unwrap();
    assert_eq!(
        eegsweep(&["features", p(&input), "--out", p(tmp.path())])
            .status
            .code(),
        Some(1)
    );
    let missing = tmp.path().join("none_*.csv");
    assert_eq!(
        eegsweep(&["features", p(&missing), "--out", p(tmp.path())])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn config_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{"trees": 3, "window_size": 4}"#).unwrap();
    let out = eegsweep(&["synth", "--config", p(&cfg), "--out", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("window_size"));

    fs::write(&cfg, r#"{"overlap_fraction": 1.5}"#).unwrap();
    assert_eq!(
        eegsweep(&["synth", "--config", p(&cfg), "--out", p(tmp.path())])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        eegsweep(&["synth", "--config", p(&tmp.path().join("nope.json"))])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn flags_override_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"synth": {"n_subjects": 3, "duration_s": 4}, "seed": 5}"#,
    )
    .unwrap();
    let out_dir = tmp.path().join("o");
    ok(&[
        "synth",
        "--config",
        p(&cfg),
        "--subjects",
        "1",
        "--out",
        p(&out_dir),
    ]);
    let manifest: serde_json::Value =
        serde_json::from_str(&read(out_dir.join("manifest_synth.json"))).unwrap();
    assert_eq!(manifest["config"]["synth"]["n_subjects"], 1);
    assert_eq!(manifest["config"]["seed"], 5);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 5);
}

#[test]
fn unwritable_output_exits_one() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = eegsweep(&[
        "synth",
        "--subjects",
        "1",
        "--duration",
        "4",
        "--out",
        p(&blocker.join("sub")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn features_are_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    study(a.path(), "2", "8");
    study(b.path(), "2", "8");
    let fa = read(a.path().join("features.csv"));
    assert_eq!(fa, read(b.path().join("features.csv")));
    assert_eq!(fa.lines().count(), 1 + 2 * 5 * 11);
}

#[test]
fn sweep_single_cell_and_strictness() {
    let tmp = TempDir::new().unwrap();
    study(tmp.path(), "2", "8");
    let features = tmp.path().join("features.csv");
    let run = |dir: &Path, extra: &[&str]| {
        let mut args = vec!["sweep", p(&features), "--out", p(dir), "--trees", "10"];
        args.extend_from_slice(extra);
        eegsweep(&args)
    };

    let one = tmp.path().join("one");
    assert!(run(
        &one,
        &["--k", "2", "--classifier", "random_forest", "--seed", "7"]
    )
    .status
    .success());
    let report = read(one.join("sweep.csv"));
    assert_eq!(report.lines().count(), 2);
    assert!(report
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("2,Random Forest,"));
    let per_label = read(one.join("per_label.csv"));
    assert_eq!(per_label.lines().count(), 1 + 5);
    assert!(per_label
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("2,Random Forest,TP9+AF7+AF8+TP10,MSPAN,"));

    let again = tmp.path().join("again");
    assert!(run(
        &again,
        &[
            "--k",
            "2",
            "--classifier",
            "random_forest",
            "--seed",
            "7",
            "--jobs",
            "1"
        ]
    )
    .status
    .success());
    assert_eq!(report, read(again.join("sweep.csv")));
    assert_eq!(
        fs::read(one.join("models/k2_random_forest.json")).unwrap(),
        fs::read(again.join("models/k2_random_forest.json")).unwrap()
    );

    let strict = tmp.path().join("strict");
    assert_eq!(
        run(&strict, &["--k", "2,4096", "--strict"]).status.code(),
        Some(1)
    );
    let lax = tmp.path().join("lax");
    let out = run(&lax, &["--k", "2,4096", "--classifier", "bagging"]);
    assert!(out.status.success());
    assert_eq!(read(lax.join("sweep.csv")).lines().count(), 2);
    let manifest = read(lax.join("manifest_sweep.json"));
    assert!(manifest.contains("k=4096"));
}

#[test]
fn sweep_grid_and_channel_subset() {
    let tmp = TempDir::new().unwrap();
    study(tmp.path(), "1", "8");
    let features = tmp.path().join("features.csv");
    ok(&[
        "sweep",
        p(&features),
        "--out",
        p(tmp.path()),
        "--trees",
        "6",
        "--k",
        "2,4,8",
        "--channels",
        "af8,tp9",
    ]);
    let report = read(tmp.path().join("sweep.csv"));
    let rows: Vec<&str> = report.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    let order: Vec<(&str, &str)> = rows
        .iter()
        .map(|r| {
            let mut f = r.split(',');
            (f.next().unwrap(), f.next().unwrap())
        })
        .collect();
    assert_eq!(order[0], ("8", "Bagging Classifier"));
    assert_eq!(order[1], ("8", "Random Forest"));
    assert_eq!(order[2], ("8", "XGBoost Classifier"));
    assert_eq!(order[8], ("2", "XGBoost Classifier"));
    assert!(read(tmp.path().join("per_label.csv")).contains(",TP9+AF8,"));
    let model = read(tmp.path().join("models/k4_gboost.json"));
    assert!(model.contains(r#""schema":["tp9_d","tp9_t","tp9_b8_12","tp9_b12_35","tp9_g","af8_d""#));
}

#[test]
fn channel_study_and_psd_summary() {
    let tmp = TempDir::new().unwrap();
    study(tmp.path(), "1", "8");
    let features = tmp.path().join("features.csv");
    ok(&[
        "channel-study",
        p(&features),
        "--out",
        p(tmp.path()),
        "--trees",
        "5",
    ]);
    let report = read(tmp.path().join("channel_study.csv"));
    let sets: Vec<&str> = report
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(sets, ["TP9", "AF7", "AF8", "TP10", "TP9+AF7+AF8+TP10"]);

    ok(&["psd-summary", p(&features), "--out", p(tmp.path())]);
    let channels = read(tmp.path().join("psd_channels.csv"));
    assert_eq!(channels.lines().count(), 1 + 5 * 4 * 5);
    assert!(channels.starts_with("task,channel,band,mean,std\nMSPAN,TP9,d,"));
    let bands = read(tmp.path().join("psd_bands.csv"));
    assert_eq!(bands.lines().count(), 1 + 5 * 5);
}

#[test]
fn report_merges_matching_headers() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    let c = tmp.path().join("c.csv");
    fs::write(&a, "interval,classifier,accuracy,f1,precision,recall\n4,Random Forest,1.00%,1.00%,1.00%,1.00%\n").unwrap();
    fs::write(&b, "interval,classifier,accuracy,f1,precision,recall\n2,Random Forest,2.00%,2.00%,2.00%,2.00%\n").unwrap();
    fs::write(&c, "task,band,mean\nTOL,d,1.0\n").unwrap();
    ok(&["report", p(&a), p(&b), "--out", p(tmp.path())]);
    assert_eq!(read(tmp.path().join("report.csv")).lines().count(), 3);
    assert_eq!(
        eegsweep(&["report", p(&a), p(&c), "--out", p(tmp.path())])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn help_exits_zero() {
    assert_eq!(eegsweep(&["--help"]).status.code(), Some(0));
    assert_eq!(eegsweep(&[]).status.code(), Some(1));
}
