//! Experiment configuration, read from flat `key = value` files.
//!
//! ```text
//! # synthetic cohort, default sweep
//! data.source = synthetic
//! synth.seed = 7
//! feature_counts = 2, 3, 4, 5
//! seeds = 0, 1, 2, 3, 4
//! shots = 1024
//! output_dir = results
//! ```
//!
//! Unknown keys are rejected so that typos do not silently fall back to
//! defaults.

use std::path::{Path, PathBuf};

use serde::Serialize;
use vqcsvm_core::kv::KvMap;
use vqcsvm_core::optimizer::Method;
use vqcsvm_core::preprocess::{Scorer, DEFAULT_RANGE};
use vqcsvm_core::vqc::{InitialTheta, Loss, Readout};
use vqcsvm_core::{DataMap, OptimizerConfig, SynthSpec};

use crate::{CliError, Result};

/// Environment variable that overrides `output_dir`.
pub const OUT_DIR_ENV: &str = "VQCSVM_OUT_DIR";

const MAX_QUBITS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Synthetic { spec: SynthSpec },
    Csv { path: PathBuf, label_column: String, positive_token: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub feature_counts: Vec<usize>,
    pub shots: u64,
    pub optimizer: OptimizerConfig,
    pub layers: usize,
    pub repetitions: usize,
    pub data_map: DataMap,
    pub loss: Loss,
    pub readout: Readout,
    pub initial_theta: InitialTheta,
    pub range: (f64, f64),
    pub test_fraction: f64,
    pub seeds: Vec<u64>,
    pub master_seed: u64,
    pub svm_c: f64,
    pub scorer: Scorer,
    pub ranking_file: Option<PathBuf>,
    /// Shuffle repeats for the permutation-importance scorer.
    pub permutation_repeats: usize,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: DataSource::Synthetic { spec: SynthSpec::default() },
            feature_counts: vec![2, 3, 4, 5],
            shots: 1024,
            optimizer: OptimizerConfig::default(),
            layers: 2,
            repetitions: 2,
            data_map: DataMap::Product,
            loss: Loss::CrossEntropy,
            readout: Readout::Parity,
            initial_theta: InitialTheta::Zeros,
            range: DEFAULT_RANGE,
            test_fraction: 0.25,
            seeds: vec![0, 1, 2, 3, 4],
            master_seed: 0,
            svm_c: 1.0,
            scorer: Scorer::FScore,
            ranking_file: None,
            permutation_repeats: 10,
            output_dir: PathBuf::from("results"),
        }
    }
}

const KEYS: &[&str] = &[
    "data.source",
    "data.path",
    "data.label_column",
    "data.positive_token",
    "synth.n_samples",
    "synth.seed",
    "synth.noise_features",
    "synth.fraction_female",
    "synth.coefficients",
    "feature_counts",
    "shots",
    "optimizer",
    "optimizer.max_evaluations",
    "optimizer.rho_begin",
    "optimizer.rho_end",
    "layers",
    "repetitions",
    "data_map",
    "loss",
    "readout",
    "initial_theta",
    "range",
    "test_fraction",
    "seeds",
    "master_seed",
    "svm.c",
    "scorer",
    "ranking_file",
    "permutation_repeats",
    "output_dir",
];

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        // Relative paths inside the file are relative to the file itself.
        let base = path.parent().unwrap_or(Path::new("."));
        if let DataSource::Csv { path: p, .. } = &mut config.source {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = &mut config.ranking_file {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let kv = KvMap::parse(text).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(unknown) = kv.keys().find(|k| !KEYS.contains(k)) {
            return Err(CliError::Config(format!("unknown key {unknown:?}")));
        }
        let d = ExperimentConfig::default();
        let cfg_err = |e: vqcsvm_core::Error| CliError::Config(e.to_string());

        let source = match kv.get_str("data.source").unwrap_or("synthetic") {
            "synthetic" => {
                let base = SynthSpec::default();
                let mut spec = SynthSpec {
                    n_samples: kv.get_or("synth.n_samples", base.n_samples).map_err(cfg_err)?,
                    seed: kv.get_or("synth.seed", base.seed).map_err(cfg_err)?,
                    n_noise_features: kv.get_or("synth.noise_features", base.n_noise_features).map_err(cfg_err)?,
                    fraction_female: kv.get_or("synth.fraction_female", base.fraction_female).map_err(cfg_err)?,
                    ..base
                };
                if let Some(coefs) = kv.get_list::<f64>("synth.coefficients").map_err(cfg_err)? {
                    spec.label_coefficients = coefs
                        .try_into()
                        .map_err(|_| CliError::Config("synth.coefficients needs 4 values".into()))?;
                }
                DataSource::Synthetic { spec }
            }
            "csv" => DataSource::Csv {
                path: PathBuf::from(kv.require_str("data.path").map_err(cfg_err)?),
                label_column: kv.get_str("data.label_column").unwrap_or("label").to_string(),
                positive_token: kv.get_str("data.positive_token").unwrap_or("1").to_string(),
            },
            other => return Err(CliError::Config(format!("data.source must be synthetic or csv, got {other:?}"))),
        };

        let mut optimizer = OptimizerConfig {
            method: kv.get_or("optimizer", Method::Cobyla).map_err(cfg_err)?,
            max_evaluations: kv.get_or("optimizer.max_evaluations", d.optimizer.max_evaluations).map_err(cfg_err)?,
            rho_begin: kv.get_or("optimizer.rho_begin", d.optimizer.rho_begin).map_err(cfg_err)?,
            rho_end: kv.get_or("optimizer.rho_end", d.optimizer.rho_end).map_err(cfg_err)?,
            ..d.optimizer.clone()
        };
        optimizer.seed = 0;

        let range = match kv.get_list::<f64>("range").map_err(cfg_err)? {
            None => d.range,
            Some(v) if v.len() == 2 => (v[0], v[1]),
            Some(_) => return Err(CliError::Config("range needs two values: lo, hi".into())),
        };

        let initial_theta = match kv.get_str("initial_theta").unwrap_or("zeros") {
            "zeros" => InitialTheta::Zeros,
            s => match s.strip_prefix("uniform:").map(str::parse::<u64>) {
                Some(Ok(seed)) => InitialTheta::SeededUniform { seed },
                _ => return Err(CliError::Config(format!("initial_theta must be zeros or uniform:<seed>, got {s:?}"))),
            },
        };

        let config = ExperimentConfig {
            source,
            feature_counts: kv.get_list("feature_counts").map_err(cfg_err)?.unwrap_or(d.feature_counts),
            shots: kv.get_or("shots", d.shots).map_err(cfg_err)?,
            optimizer,
            layers: kv.get_or("layers", d.layers).map_err(cfg_err)?,
            repetitions: kv.get_or("repetitions", d.repetitions).map_err(cfg_err)?,
            data_map: kv.get_or("data_map", d.data_map).map_err(cfg_err)?,
            loss: kv.get_or("loss", d.loss).map_err(cfg_err)?,
            readout: kv.get_or("readout", d.readout).map_err(cfg_err)?,
            initial_theta,
            range,
            test_fraction: kv.get_or("test_fraction", d.test_fraction).map_err(cfg_err)?,
            seeds: kv.get_list("seeds").map_err(cfg_err)?.unwrap_or(d.seeds),
            master_seed: kv.get_or("master_seed", d.master_seed).map_err(cfg_err)?,
            svm_c: kv.get_or("svm.c", d.svm_c).map_err(cfg_err)?,
            scorer: kv.get_or("scorer", d.scorer).map_err(cfg_err)?,
            ranking_file: kv.get_str("ranking_file").map(PathBuf::from),
            permutation_repeats: kv.get_or("permutation_repeats", d.permutation_repeats).map_err(cfg_err)?,
            output_dir: kv.get_str("output_dir").map(PathBuf::from).unwrap_or(d.output_dir),
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks that do not need the data. [`validate_against`] covers the
    /// feature-count bound once the column count is known.
    ///
    /// [`validate_against`]: ExperimentConfig::validate_against
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.feature_counts.is_empty() {
            return bad("feature_counts is empty".into());
        }
        if let Some(k) = self.feature_counts.iter().find(|&&k| !(2..=MAX_QUBITS).contains(&k)) {
            return bad(format!("feature count {k} outside 2..={MAX_QUBITS}"));
        }
        if self.seeds.is_empty() {
            return bad("seeds is empty".into());
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return bad(format!("seed {dup} listed twice"));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.feature_counts.iter().find(|k| !seen.insert(**k)) {
            return bad(format!("feature count {dup} listed twice"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test_fraction {} not in (0, 1)", self.test_fraction));
        }
        if !(self.svm_c > 0.0 && self.svm_c.is_finite()) {
            return bad(format!("svm.c must be positive, got {}", self.svm_c));
        }
        if self.layers == 0 || self.repetitions == 0 {
            return bad("layers and repetitions must be at least 1".into());
        }
        if !(self.range.0 < self.range.1 && self.range.0.is_finite() && self.range.1.is_finite()) {
            return bad(format!("range [{}, {}] is empty", self.range.0, self.range.1));
        }
        if self.scorer == Scorer::Imported && self.ranking_file.is_none() {
            return bad("scorer = imported needs ranking_file".into());
        }
        if self.scorer == Scorer::PermutationImportance && self.permutation_repeats == 0 {
            return bad("permutation_repeats must be at least 1".into());
        }
        let max_k = *self.feature_counts.iter().max().expect("non-empty");
        // Ansatz parameter count for the widest cell.
        self.optimizer.validate(2 * max_k * (self.layers + 1)).map_err(|e| CliError::Config(e.to_string()))?;
        if let DataSource::Synthetic { spec } = &self.source {
            spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn validate_against(&self, n_features: usize) -> Result<()> {
        match self.feature_counts.iter().find(|&&k| k > n_features) {
            Some(k) => Err(CliError::Config(format!("feature count {k} exceeds the {n_features} available features"))),
            None => Ok(()),
        }
    }

    /// `output_dir`, unless the environment overrides it.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn parses_overrides() {
        let c = ExperimentConfig::parse(
            "data.source = csv\ndata.path = x.csv\ndata.label_column = y\nfeature_counts = 2\nseeds = 9, 10\n\
             shots = 0\noptimizer = spsa\noptimizer.max_evaluations = 50\nrange = 0, 1\ninitial_theta = uniform:4\n",
        )
        .unwrap();
        assert_eq!(c.feature_counts, vec![2]);
        assert_eq!(c.seeds, vec![9, 10]);
        assert_eq!(c.shots, 0);
        assert_eq!(c.optimizer.method, Method::Spsa);
        assert_eq!(c.optimizer.max_evaluations, 50);
        assert_eq!(c.range, (0.0, 1.0));
        assert_eq!(c.initial_theta, InitialTheta::SeededUniform { seed: 4 });
        assert!(matches!(c.source, DataSource::Csv { ref label_column, .. } if label_column == "y"));
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "feature_counts = 1",
            "feature_counts = 11",
            "feature_count = 2",
            "test_fraction = 0",
            "svm.c = -1",
            "seeds = 1, 1",
            "layers = 0",
            "scorer = imported",
            "data.source = parquet",
            "range = 1, 0",
            "optimizer.max_evaluations = 3",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn feature_count_bound_needs_data() {
        let c = ExperimentConfig::parse("feature_counts = 2, 6").unwrap();
        assert!(c.validate_against(5).is_err());
        assert!(c.validate_against(6).is_ok());
    }
}
