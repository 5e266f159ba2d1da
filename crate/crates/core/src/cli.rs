//! Command-line front end: `synth`, `features`, `sweep`, `channel-study`,
//! `psd-summary` and `report`.
//!
//! Settings come from an optional JSON config file; flags override it. Every
//! command writes a `manifest_<command>.json` next to its outputs. Exit codes
//! are 0 on success, 1 for configuration problems and 2 for bad data.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::ensemble::{Classifier, TrainConfig, VoteRule, MODEL_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::eval::{
    channel_study_csv, per_label_csv, psd_band_csv, psd_channel_csv, psd_summary,
    run_channel_study, run_sweep_with, sweep_csv, DEFAULT_K_VALUES,
};
use crate::ingest::{
    labels_from_filename, parse_muse_csv, write_muse_csv, ChannelId, RawRecording,
    DEFAULT_EXCLUSION_RADIUS_S,
};
use crate::pipeline::{build_dataset, FeatureConfig};
use crate::spectral::{BandDefinition, WindowConfig};
use crate::synth::{default_profiles, generate_study, planted_profiles, SynthConfig, TaskProfile};

/// Tree hyperparameters other than the tree count and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TreeParams {
    pub mtry: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub boost_rounds: Option<usize>,
    pub bootstrap: bool,
    pub vote: VoteRule,
}

impl Default for TreeParams {
    fn default() -> Self {
        let t = TrainConfig::default();
        TreeParams {
            mtry: t.mtry,
            max_depth: t.max_depth,
            min_samples_split: t.min_samples_split,
            learning_rate: t.learning_rate,
            l2_lambda: t.l2_lambda,
            boost_rounds: t.boost_rounds,
            bootstrap: t.bootstrap,
            vote: t.vote,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub n_subjects: usize,
    pub duration_s: f64,
    pub noise_sigma: f64,
    pub marker_rate_hz: Option<f64>,
    /// `default`, or `planted-<channel>` for signal on one channel only.
    pub profile: String,
}

impl Default for SynthSection {
    fn default() -> Self {
        let s = SynthConfig::default();
        SynthSection {
            n_subjects: s.n_subjects,
            duration_s: s.duration_s,
            noise_sigma: s.noise_sigma,
            marker_rate_hz: s.marker_rate_hz,
            profile: "default".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub sample_rate_hz: f64,
    pub window_seconds: f64,
    pub overlap_fraction: f64,
    pub exclusion_radius_s: f64,
    pub bands: Vec<BandDefinition>,
    pub k_values: Vec<usize>,
    pub classifiers: Vec<Classifier>,
    pub trees: usize,
    pub seed: u64,
    /// Channel subset for training; empty means all four.
    pub channels: Vec<ChannelId>,
    /// Files, directories or glob patterns.
    pub inputs: Vec<String>,
    pub out_dir: PathBuf,
    pub strict: bool,
    pub tree_params: TreeParams,
    pub synth: SynthSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let w = WindowConfig::default();
        RunConfig {
            sample_rate_hz: 256.0,
            window_seconds: w.window_seconds,
            overlap_fraction: w.overlap_fraction,
            exclusion_radius_s: DEFAULT_EXCLUSION_RADIUS_S,
            bands: BandDefinition::defaults(),
            k_values: DEFAULT_K_VALUES.to_vec(),
            classifiers: Classifier::ALL.to_vec(),
            trees: 100,
            seed: 0,
            channels: Vec::new(),
            inputs: Vec::new(),
            out_dir: PathBuf::from("out"),
            strict: false,
            tree_params: TreeParams::default(),
            synth: SynthSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            window: WindowConfig {
                window_seconds: self.window_seconds,
                overlap_fraction: self.overlap_fraction,
            },
            exclusion_radius_s: self.exclusion_radius_s,
            bands: self.bands.clone(),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let p = &self.tree_params;
        TrainConfig {
            n_trees: self.trees,
            mtry: p.mtry,
            max_depth: p.max_depth,
            min_samples_split: p.min_samples_split,
            learning_rate: p.learning_rate,
            l2_lambda: p.l2_lambda,
            boost_rounds: p.boost_rounds,
            bootstrap: p.bootstrap,
            vote: p.vote,
            seed: self.seed,
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            sample_rate_hz: self.sample_rate_hz,
            duration_s: self.synth.duration_s,
            noise_sigma: self.synth.noise_sigma,
            n_subjects: self.synth.n_subjects,
            marker_rate_hz: self.synth.marker_rate_hz,
            seed: self.seed,
        }
    }

    pub fn synth_profiles(&self) -> Result<Vec<TaskProfile>> {
        let name = self.synth.profile.to_ascii_lowercase();
        if name == "default" {
            return Ok(default_profiles());
        }
        match name.strip_prefix("planted-") {
            Some(ch) => Ok(planted_profiles(ch.parse().map_err(|_| {
                Error::Config(format!(
                    "unknown channel in profile '{}'",
                    self.synth.profile
                ))
            })?)),
            None => Err(Error::Config(format!(
                "unknown profile '{}'; expected default or planted-<channel>",
                self.synth.profile
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.feature_config().validate(self.sample_rate_hz)?;
        self.train_config().validate()?;
        if self.k_values.is_empty() {
            return Err(Error::Config("k_values is empty".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("classifier list is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "eegsweep",
    version,
    about = "EEG band-power task classification sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic study as Muse-format CSV files.
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        subjects: Option<usize>,
        #[arg(long, value_name = "SECONDS")]
        duration: Option<f64>,
        #[arg(long, value_name = "MICROVOLTS")]
        noise: Option<f64>,
        #[arg(long, value_name = "HZ")]
        marker_rate: Option<f64>,
        /// `default` or `planted-<channel>`.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Turn recordings into a feature table.
    Features {
        #[command(flatten)]
        common: CommonArgs,
        /// Files, directories or glob patterns.
        inputs: Vec<String>,
    },
    /// Train and score every classifier at every interval size.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        features: PathBuf,
    },
    /// Random forest at k = 2 on each channel alone and on all four.
    ChannelStudy {
        #[command(flatten)]
        common: CommonArgs,
        features: PathBuf,
    },
    /// Per-task band-power means.
    PsdSummary {
        #[command(flatten)]
        common: CommonArgs,
        features: PathBuf,
    },
    /// Concatenate report CSVs that share a header.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "HZ")]
    pub fs: Option<f64>,
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub classifier: Option<Vec<String>>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub channels: Option<Vec<String>>,
    /// Fail instead of skipping interval sizes that do not fit the data.
    #[arg(long)]
    pub strict: bool,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.fs {
            cfg.sample_rate_hz = v;
        }
        if let Some(v) = &self.k {
            cfg.k_values = v.clone();
        }
        if let Some(v) = &self.classifier {
            cfg.classifiers = v.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(v) = self.trees {
            cfg.trees = v;
        }
        if let Some(v) = &self.channels {
            cfg.channels = v.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        cfg.strict |= self.strict;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

/// Everything that varies between otherwise identical runs.
#[derive(Clone, Debug, Serialize)]
pub struct RunTiming {
    pub started_at: String,
    pub finished_at: String,
    pub stages: Vec<StageTime>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub model_format_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub notes: Vec<String>,
    pub timing: RunTiming,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Write through a sibling temporary file so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

struct Run {
    command: &'static str,
    config: RunConfig,
    started_at: String,
    inputs: Vec<FileDigest>,
    outputs: Vec<PathBuf>,
    notes: Vec<String>,
    stages: Vec<StageTime>,
}

impl Run {
    fn new(command: &'static str, config: RunConfig) -> Run {
        Run {
            command,
            config,
            started_at: chrono::Utc::now().to_rfc3339(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
            stages: Vec::new(),
        }
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f(self)?;
        self.stages.push(StageTime {
            stage: name.into(),
            seconds: t.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    fn emit(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out_path(name);
        write_atomic(&path, contents.as_bytes())?;
        self.outputs.push(path);
        Ok(())
    }

    fn note(&mut self, message: String) {
        log::warn!("{message}");
        self.notes.push(message);
    }

    fn finish(self) -> Result<()> {
        let outputs = self
            .outputs
            .iter()
            .map(|p| digest_file(p))
            .collect::<Result<_>>()?;
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            model_format_version: MODEL_FORMAT_VERSION,
            command: self.command.into(),
            config: self.config.clone(),
            inputs: self.inputs,
            outputs,
            notes: self.notes,
            timing: RunTiming {
                started_at: self.started_at,
                finished_at: chrono::Utc::now().to_rfc3339(),
                stages: self.stages,
            },
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        write_atomic(
            &self
                .config
                .out_dir
                .join(format!("manifest_{}.json", self.command)),
            text.as_bytes(),
        )
    }
}

/// Expand files, directories (their `*.csv`) and glob patterns, keeping
/// pattern order and sorting matches within a pattern.
pub fn expand_inputs(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for pat in patterns {
        let path = Path::new(pat);
        if path.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
                .collect();
            found.sort();
            out.extend(found);
        } else if path.is_file() {
            out.push(path.to_path_buf());
        } else {
            let mut found: Vec<PathBuf> = glob::glob(pat)
                .map_err(|e| Error::Config(format!("bad input pattern '{pat}': {e}")))?
                .filter_map(|p| p.ok())
                .filter(|p| p.is_file())
                .collect();
            if found.is_empty() {
                return Err(Error::Config(format!("input '{pat}' matches no files")));
            }
            found.sort();
            out.extend(found);
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|p| seen.insert(p.clone()));
    Ok(out)
}

fn read_recording(path: &Path, fs_hz: f64) -> Result<(RawRecording, FileDigest)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };
    let (subject, task) = labels_from_filename(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse {
        source_name: Some(path.display().to_string()),
        line: None,
        message: "not UTF-8 text".into(),
    })?;
    let rec = parse_muse_csv(&text, &subject, task, fs_hz)
        .map_err(|e| e.with_source_name(path.display().to_string()))?;
    Ok((rec, digest))
}

fn read_features(run: &mut Run, path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    run.inputs.push(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    });
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Data(format!("{}: not UTF-8 text", path.display())))?;
    let d = Dataset::from_csv(&text).map_err(|e| e.with_source_name(path.display().to_string()))?;
    if d.is_empty() {
        return Err(Error::Data(format!(
            "{}: feature table has no rows",
            path.display()
        )));
    }
    if run.config.channels.is_empty() {
        Ok(d)
    } else {
        d.select_channels(&run.config.channels)
    }
}

fn cmd_synth(mut run: Run) -> Result<()> {
    let cfg = run.config.synth_config();
    let profiles = run.config.synth_profiles()?;
    let study = run.stage("generate", |_| generate_study(&profiles, &cfg))?;
    run.stage("write", |run| {
        let files: Vec<(String, String)> = study
            .par_iter()
            .map(|r| {
                (
                    format!("{}_{}.csv", r.subject_id, r.task),
                    write_muse_csv(r),
                )
            })
            .collect();
        for (name, text) in files {
            run.emit(&name, &text)?;
        }
        Ok(())
    })?;
    run.finish()
}

fn cmd_features(mut run: Run, inputs: &[String]) -> Result<()> {
    let patterns = if inputs.is_empty() {
        run.config.inputs.clone()
    } else {
        inputs.to_vec()
    };
    if patterns.is_empty() {
        return Err(Error::Config("no input files given".into()));
    }
    let paths = expand_inputs(&patterns)?;
    let fs_hz = run.config.sample_rate_hz;
    let mut recordings = run.stage("ingest", |run| {
        let parsed: Vec<(RawRecording, FileDigest)> = paths
            .par_iter()
            .map(|p| read_recording(p, fs_hz))
            .collect::<Result<_>>()?;
        let mut recs = Vec::with_capacity(parsed.len());
        for (rec, digest) in parsed {
            run.inputs.push(digest);
            recs.push(rec);
        }
        Ok(recs)
    })?;
    let mut subjects: Vec<String> = Vec::new();
    for r in &recordings {
        if !subjects.contains(&r.subject_id) {
            subjects.push(r.subject_id.clone());
        }
    }
    recordings.sort_by_key(|r| {
        (
            subjects.iter().position(|s| *s == r.subject_id),
            r.task.index(),
        )
    });
    let fcfg = run.config.feature_config();
    let d = run.stage("features", |_| build_dataset(&recordings, &fcfg))?;
    if d.is_empty() {
        run.note("no clean windows survived artifact rejection; feature table is empty".into());
    }
    run.emit("features.csv", &d.to_csv())?;
    run.finish()
}

fn cmd_sweep(mut run: Run, features: &Path) -> Result<()> {
    let d = read_features(&mut run, features)?;
    if run.config.strict {
        if let Some(k) = run.config.k_values.iter().find(|&&k| k < 2 || k > d.len()) {
            return Err(Error::Config(format!(
                "k = {k} outside [2, {}] with --strict",
                d.len()
            )));
        }
    }
    let tcfg = run.config.train_config();
    let classifiers = run.config.classifiers.clone();
    let ks = run.config.k_values.clone();
    let out_dir = run.config.out_dir.clone();
    let mut models = Vec::new();
    let outcome = run.stage("sweep", |_| {
        run_sweep_with(&d, &classifiers, &ks, &tcfg, |r, m| {
            let path = out_dir
                .join("models")
                .join(format!("k{}_{}.json", r.k, r.classifier.key()));
            write_atomic(&path, m.to_json().as_bytes())?;
            models.push(path);
            Ok(())
        })
    })?;
    for s in &outcome.skipped {
        run.note(format!(
            "skipped {} at k={}: {}",
            s.classifier.display_name(),
            s.k,
            s.reason
        ));
    }
    run.emit("sweep.csv", &sweep_csv(&outcome.results))?;
    run.emit("per_label.csv", &per_label_csv(&outcome.results))?;
    run.outputs.extend(models);
    run.finish()
}

fn cmd_channel_study(mut run: Run, features: &Path) -> Result<()> {
    run.config.channels.clear();
    let d = read_features(&mut run, features)?;
    let tcfg = run.config.train_config();
    let results = run.stage("channel-study", |_| run_channel_study(&d, &tcfg))?;
    run.emit("channel_study.csv", &channel_study_csv(&results))?;
    run.emit("channel_study_per_label.csv", &per_label_csv(&results))?;
    run.finish()
}

fn cmd_psd_summary(mut run: Run, features: &Path) -> Result<()> {
    let d = read_features(&mut run, features)?;
    let s = run.stage("psd-summary", |_| psd_summary(&d))?;
    for t in &s.missing_tasks {
        run.note(format!("no windows for task {t}; omitted"));
    }
    run.emit("psd_channels.csv", &psd_channel_csv(&s))?;
    run.emit("psd_bands.csv", &psd_band_csv(&s))?;
    run.finish()
}

/// Concatenate CSV texts that share a header line.
pub fn merge_reports(texts: &[(String, String)]) -> Result<String> {
    let mut header: Option<&str> = None;
    let mut out = String::new();
    for (name, text) in texts {
        let mut lines = text.lines();
        let h = lines
            .next()
            .ok_or_else(|| Error::Data(format!("{name}: empty report")))?;
        match header {
            None => {
                header = Some(h);
                out.push_str(h);
                out.push('\n');
            }
            Some(expected) if expected != h => {
                return Err(Error::Data(format!(
                    "{name}: header '{h}' differs from '{expected}'"
                )));
            }
            Some(_) => {}
        }
        for line in lines.filter(|l| !l.is_empty()) {
            out.push_str(line);
            out.push('\n');
        }
    }
    Ok(out)
}

fn cmd_report(mut run: Run, reports: &[PathBuf]) -> Result<()> {
    let mut texts = Vec::new();
    for p in reports {
        let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
        run.inputs.push(FileDigest {
            path: p.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Data(format!("{}: not UTF-8 text", p.display())))?;
        texts.push((p.display().to_string(), text));
    }
    let merged = merge_reports(&texts)?;
    run.emit("report.csv", &merged)?;
    run.finish()
}

fn execute(command: Command) -> Result<()> {
    let (name, common) = match &command {
        Command::Synth { common, .. } => ("synth", common),
        Command::Features { common, .. } => ("features", common),
        Command::Sweep { common, .. } => ("sweep", common),
        Command::ChannelStudy { common, .. } => ("channel_study", common),
        Command::PsdSummary { common, .. } => ("psd_summary", common),
        Command::Report { common, .. } => ("report", common),
    };
    let mut cfg = common.resolve()?;
    if let Command::Synth {
        subjects,
        duration,
        noise,
        marker_rate,
        profile,
        ..
    } = &command
    {
        let s = &mut cfg.synth;
        s.n_subjects = subjects.unwrap_or(s.n_subjects);
        s.duration_s = duration.unwrap_or(s.duration_s);
        s.noise_sigma = noise.unwrap_or(s.noise_sigma);
        s.marker_rate_hz = marker_rate.or(s.marker_rate_hz);
        if let Some(p) = profile {
            s.profile = p.clone();
        }
        cfg.synth_config().validate()?;
        cfg.synth_profiles()?;
    }
    let jobs = common.jobs;
    if jobs == Some(0) {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let run = Run::new(name, cfg);
    pool.install(|| match &command {
        Command::Synth { .. } => cmd_synth(run),
        Command::Features { inputs, .. } => cmd_features(run, inputs),
        Command::Sweep { features, .. } => cmd_sweep(run, features),
        Command::ChannelStudy { features, .. } => cmd_channel_study(run, features),
        Command::PsdSummary { features, .. } => cmd_psd_summary(run, features),
        Command::Report { reports, .. } => cmd_report(run, reports),
    })
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(matches!(
            RunConfig::from_json(r#"{"trees": 5, "colour": 1}"#),
            Err(Error::Config(_))
        ));
        let c = RunConfig::from_json(
            r#"{"trees": 5, "k_values": [2, 4], "tree_params": {"vote": "majority"}}"#,
        )
        .unwrap();
        assert_eq!(c.trees, 5);
        assert_eq!(c.k_values, vec![2, 4]);
        assert_eq!(c.train_config().vote, VoteRule::Majority);
        assert_eq!(c.train_config().n_trees, 5);
    }

    #[test]
    fn config_round_trips() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn profiles_by_name() {
        let mut c = RunConfig::default();
        assert_eq!(c.synth_profiles().unwrap(), default_profiles());
        c.synth.profile = "planted-af8".into();
        assert_eq!(
            c.synth_profiles().unwrap(),
            planted_profiles(ChannelId::AF8)
        );
        c.synth.profile = "planted-xx".into();
        assert!(c.synth_profiles().is_err());
        c.synth.profile = "pink".into();
        assert!(c.synth_profiles().is_err());
    }

    #[test]
    fn merge_checks_headers() {
        let a = ("a".to_string(), "h1,h2\n1,2\n".to_string());
        let b = ("b".to_string(), "h1,h2\n3,4\n".to_string());
        let c = ("c".to_string(), "x\n5\n".to_string());
        assert_eq!(merge_reports(&[a.clone(), b]).unwrap(), "h1,h2\n1,2\n3,4\n");
        assert!(merge_reports(&[a, c]).is_err());
    }

    #[test]
    fn flag_parsing() {
        let cli = Cli::try_parse_from([
            "eegsweep",
            "sweep",
            "f.csv",
            "--k",
            "2,16",
            "--classifier",
            "rf,bagging",
            "--trees",
            "7",
        ])
        .unwrap();
        let Command::Sweep { common, features } = cli.command else {
            panic!()
        };
        assert_eq!(features, PathBuf::from("f.csv"));
        let cfg = common.resolve().unwrap();
        assert_eq!(cfg.k_values, vec![2, 16]);
        assert_eq!(
            cfg.classifiers,
            vec![Classifier::RandomForest, Classifier::Bagging]
        );
        assert_eq!(cfg.trees, 7);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["eegsweep", "nonsense"]), 1);
        assert_eq!(run(["eegsweep", "sweep", "f.csv", "--trees", "0"]), 1);
        assert_eq!(
            run(["eegsweep", "sweep", "f.csv", "--classifier", "svm"]),
            1
        );
    }
}
