//! Results JSON, per-metric plot CSVs and the atomic file writes behind them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use vqcsvm_core::metrics::Degeneracy;
use vqcsvm_core::{Dataset, Label, MetricsRecord};

use crate::config::ExperimentConfig;
use crate::{CliError, Result};

pub const RESULTS_FILE: &str = "results.json";
pub const METRICS: [&str; 4] = ["accuracy", "precision", "recall", "f1"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub model: String,
    pub k: usize,
    pub seed: u64,
    pub split: Split,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: Degeneracy,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub shots: u64,
    pub features: Vec<String>,
    pub feature_digest: String,
    pub wall_time_ms: u64,
}

impl Record {
    pub fn new(m: &MetricsRecord, split: Split, features: Vec<String>, feature_digest: String, wall_time_ms: u64) -> Self {
        Record {
            model: m.model.clone(),
            k: m.feature_count,
            seed: m.seed,
            split,
            accuracy: m.metrics.accuracy,
            precision: m.metrics.precision,
            recall: m.metrics.recall,
            f1: m.metrics.f1,
            degenerate: m.metrics.degenerate,
            tp: m.counts.tp,
            fp: m.counts.fp,
            fn_: m.counts.fn_,
            tn: m.counts.tn,
            shots: m.shots,
            features,
            feature_digest,
            wall_time_ms,
        }
    }

    pub fn metric(&self, name: &str) -> f64 {
        match name {
            "accuracy" => self.accuracy,
            "precision" => self.precision,
            "recall" => self.recall,
            "f1" => self.f1,
            other => panic!("unknown metric {other}"),
        }
    }
}

/// A (k, seed) cell stage that did not complete.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub k: usize,
    pub seed: u64,
    pub model: Option<String>,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub n_samples: usize,
    pub n_features: usize,
    pub positives: usize,
    pub negatives: usize,
    pub rows_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Results {
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub records: Vec<Record>,
    pub failures: Vec<Failure>,
}

impl Results {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// SHA-256 over the selected column indices and the exact bytes of the
/// scaled train and test matrices and labels.
pub fn feature_digest(columns: &[usize], train: &Dataset, test: &Dataset) -> String {
    let mut h = Sha256::new();
    for c in columns {
        h.update((*c as u64).to_le_bytes());
    }
    for ds in [train, test] {
        h.update((ds.n_samples() as u64).to_le_bytes());
        for (row, y) in ds.features().iter().zip(ds.labels()) {
            for v in row {
                h.update(v.to_le_bytes());
            }
            h.update([(*y == Label::Positive) as u8]);
        }
    }
    hex::encode(h.finalize())
}

/// `(mean, sd)` with the sample standard deviation; one value gives sd 0.
fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One CSV body per metric (`k,model,mean,sd`, held-out split, rows sorted by
/// model then k). Models without any test record are left out with a
/// warning.
pub fn plot_tables(results: &Results, models: &[&str]) -> (Vec<(String, String)>, Vec<String>) {
    let mut warnings = Vec::new();
    let test: Vec<&Record> = results.records.iter().filter(|r| r.split == Split::Test).collect();
    let present: Vec<&str> = models
        .iter()
        .copied()
        .filter(|m| {
            let any = test.iter().any(|r| r.model == *m);
            if !any {
                warnings.push(format!("no test records for model {m}; series left out of plot data"));
            }
            any
        })
        .collect();
    let mut tables = Vec::new();
    for metric in METRICS {
        let mut groups: BTreeMap<(&str, usize), Vec<f64>> = BTreeMap::new();
        for r in &test {
            if let Some(m) = present.iter().find(|m| **m == r.model) {
                groups.entry((m, r.k)).or_default().push(r.metric(metric));
            }
        }
        let mut body = String::from("k,model,mean,sd\n");
        for ((model, k), values) in &groups {
            let (mean, sd) = mean_sd(values);
            writeln!(body, "{k},{model},{mean:?},{sd:?}").expect("writing to a String");
        }
        tables.push((format!("plot_{metric}.csv"), body));
    }
    (tables, warnings)
}

/// Write `contents` to a sibling temporary file, then rename it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io)
}

/// Write the results JSON and plot CSVs under `dir`; returns the paths
/// written and any warnings.
pub fn write_all(results: &Results, dir: &Path, models: &[&str]) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let json = serde_json::to_string_pretty(results).expect("results serialise");
    let mut written = Vec::new();
    let path = dir.join(RESULTS_FILE);
    write_atomic(&path, format!("{json}\n").as_bytes())?;
    written.push(path);
    let (tables, warnings) = plot_tables(results, models);
    if !results.records.is_empty() {
        for (name, body) in tables {
            let path = dir.join(name);
            write_atomic(&path, body.as_bytes())?;
            written.push(path);
        }
    }
    Ok((written, warnings))
}
