//! The feature-count × seed sweep.
//!
//! Each cell `(k, seed index)` splits the data, fits the scaler on the
//! training split, ranks features on the scaled training split, keeps the
//! top `k`, and trains both classifiers on that same matrix. Cells are
//! independent and run on the rayon pool; records are emitted in
//! `(k, seed index, model, split)` order regardless of scheduling.
//!
//! Seeds: the split of repetition `i` uses `derive_seed(master, [0, i, seeds[i]])`
//! so every `k` sees the same partition; everything model-specific uses
//! `derive_seed(master, [k, i, seeds[i]])` and tags below it.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use vqcsvm_core::data::{self, CsvOptions};
use vqcsvm_core::preprocess::{self, FeatureRanking, Scorer};
use vqcsvm_core::rng::derive_seed;
use vqcsvm_core::svm::{self, SvmConfig};
use vqcsvm_core::vqc::{self, TrainConfig};
use vqcsvm_core::{AnsatzSpec, Dataset, FeatureMapSpec, Label, MetricsRecord};

use crate::config::{DataSource, ExperimentConfig};
use crate::output::{self, DatasetSummary, Failure, Record, Results, Split};
use crate::{CliError, Result};

pub const VQC: &str = "vqc";
pub const SVM: &str = "svm";
pub const MODELS: [&str; 2] = [VQC, SVM];

const SPLIT_TAG: u64 = 0;
const TAG_OPTIMIZER: u64 = 1;
const TAG_SHOTS: u64 = 2;
const TAG_RANKING: u64 = 3;

/// Results plus the files written for them.
#[derive(Debug)]
pub struct RunOutcome {
    pub results: Results,
    pub output_dir: PathBuf,
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

pub fn load_data(config: &ExperimentConfig) -> Result<(Dataset, usize)> {
    let stage = |e: vqcsvm_core::Error| CliError::stage("load", e);
    match &config.source {
        DataSource::Synthetic { spec } => Ok((data::generate_synthetic(spec).map_err(stage)?, 0)),
        DataSource::Csv { path, label_column, positive_token } => {
            let (ds, report) =
                data::load_csv(path, &CsvOptions::new(label_column.clone(), positive_token.clone())).map_err(stage)?;
            Ok((ds, report.rows_dropped))
        }
    }
}

/// Cell-independent inputs shared by every cell.
struct Shared<'a> {
    config: &'a ExperimentConfig,
    data: Dataset,
    imported: Option<FeatureRanking>,
}

/// Run the sweep and return results without touching the filesystem.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Results> {
    config.validate()?;
    let (data, rows_dropped) = load_data(config)?;
    config.validate_against(data.n_features())?;
    let imported = match (&config.scorer, &config.ranking_file) {
        (Scorer::Imported, Some(path)) => {
            Some(preprocess::load_ranking(path, data.names()).map_err(|e| CliError::stage("rank", e))?)
        }
        _ => None,
    };
    let (positives, negatives) = data.class_counts();
    let dataset = DatasetSummary {
        n_samples: data.n_samples(),
        n_features: data.n_features(),
        positives,
        negatives,
        rows_dropped,
    };
    let shared = Shared { config, data, imported };
    let cells: Vec<(usize, usize)> = config
        .feature_counts
        .iter()
        .flat_map(|&k| (0..config.seeds.len()).map(move |i| (k, i)))
        .collect();
    let outcomes: Vec<(Vec<Record>, Vec<Failure>)> = cells.par_iter().map(|&(k, i)| run_cell(&shared, k, i)).collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in outcomes {
        records.extend(r);
        failures.extend(f);
    }
    Ok(Results { config: config.clone(), dataset, records, failures })
}

/// Run the sweep and write results under the resolved output directory.
/// Partial results are written even when some cells fail.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    let results = run_sweep(config)?;
    let output_dir = config.resolved_output_dir();
    let (written, warnings) = output::write_all(&results, &output_dir, &MODELS)?;
    Ok(RunOutcome { results, output_dir, written, warnings })
}

fn split_seed(config: &ExperimentConfig, i: usize) -> u64 {
    derive_seed(config.master_seed, &[SPLIT_TAG, i as u64, config.seeds[i]])
}

fn cell_seed(config: &ExperimentConfig, k: usize, i: usize) -> u64 {
    derive_seed(config.master_seed, &[k as u64, i as u64, config.seeds[i]])
}

fn run_cell(shared: &Shared, k: usize, i: usize) -> (Vec<Record>, Vec<Failure>) {
    let config = shared.config;
    let seed = config.seeds[i];
    let fail = |model: Option<&str>, stage: &str, e: &dyn std::fmt::Display| Failure {
        k,
        seed,
        model: model.map(str::to_string),
        stage: stage.to_string(),
        message: e.to_string(),
    };
    let prepared = match prepare(shared, k, i) {
        Ok(p) => p,
        Err((stage, e)) => return (Vec::new(), vec![fail(None, stage, &e)]),
    };
    let mut records = Vec::new();
    let mut failures = Vec::new();
    match train_vqc(config, &prepared, k, i) {
        Ok(r) => records.extend(r),
        Err((stage, e)) => failures.push(fail(Some(VQC), stage, &e)),
    }
    match train_svm(config, &prepared, k, i) {
        Ok(r) => records.extend(r),
        Err((stage, e)) => failures.push(fail(Some(SVM), stage, &e)),
    }
    (records, failures)
}

/// Scaled top-k train and test sets for one cell.
struct Prepared {
    train: Dataset,
    test: Dataset,
    names: Vec<String>,
    columns: Vec<usize>,
}

type StageResult<T> = std::result::Result<T, (&'static str, vqcsvm_core::Error)>;

fn prepare(shared: &Shared, k: usize, i: usize) -> StageResult<Prepared> {
    let config = shared.config;
    let (train, test) = data::split(&shared.data, config.test_fraction, split_seed(config, i)).map_err(|e| ("split", e))?;
    let scaler = preprocess::fit_scaler(train.features(), config.range).map_err(|e| ("scale", e))?;
    let train = train.with_features(scaler.transform(train.features()).map_err(|e| ("scale", e))?).map_err(|e| ("scale", e))?;
    let test = test.with_features(scaler.transform(test.features()).map_err(|e| ("scale", e))?).map_err(|e| ("scale", e))?;

    let ranking = match config.scorer {
        Scorer::FScore => preprocess::rank_by_f_score(&train),
        Scorer::Imported => Ok(shared.imported.clone().expect("loaded before the sweep")),
        Scorer::PermutationImportance => svm::train_svm(&train, &SvmConfig::with_c(config.svm_c)).and_then(|baseline| {
            preprocess::permutation_importance(
                &train,
                &baseline,
                config.permutation_repeats,
                derive_seed(cell_seed(config, k, i), &[TAG_RANKING]),
            )
        }),
    }
    .map_err(|e| ("rank", e))?;
    let columns = preprocess::select_top_k(&ranking, k).map_err(|e| ("select", e))?;
    let train = train.select_columns(&columns).map_err(|e| ("select", e))?;
    let test = test.select_columns(&columns).map_err(|e| ("select", e))?;
    Ok(Prepared { names: train.names().to_vec(), train, test, columns })
}

fn records_for(model: &str, k: usize, shots: u64, seed: u64, p: &Prepared, preds: [Vec<Label>; 2], ms: u64) -> StageResult<Vec<Record>> {
    let [train_preds, test_preds] = preds;
    // Hashed from the matrices the model was just trained and evaluated on.
    let digest = output::feature_digest(&p.columns, &p.train, &p.test);
    let mut out = Vec::with_capacity(2);
    for (split, preds, ds) in [(Split::Train, train_preds, &p.train), (Split::Test, test_preds, &p.test)] {
        let m = MetricsRecord::from_predictions(model, k, shots, seed, &preds, ds.labels()).map_err(|e| ("evaluate", e))?;
        out.push(Record::new(&m, split, p.names.clone(), digest.clone(), ms));
    }
    Ok(out)
}

fn train_vqc(config: &ExperimentConfig, p: &Prepared, k: usize, i: usize) -> StageResult<Vec<Record>> {
    let start = Instant::now();
    let cell = cell_seed(config, k, i);
    let mut optimizer = config.optimizer.clone();
    optimizer.seed = derive_seed(cell, &[TAG_OPTIMIZER]);
    let train_config = TrainConfig {
        optimizer,
        initial_theta: config.initial_theta,
        loss: config.loss,
        shots: config.shots,
        seed: derive_seed(cell, &[TAG_SHOTS]),
        readout: config.readout,
    };
    let fm = FeatureMapSpec::new(k, config.data_map).with_repetitions(config.repetitions);
    let ansatz = AnsatzSpec::new(k, config.layers);
    let model = vqc::train(&p.train, &fm, &ansatz, &train_config).map_err(|e| ("train", e))?;
    let preds = [
        model.predict(p.train.features()).map_err(|e| ("predict", e))?,
        model.predict(p.test.features()).map_err(|e| ("predict", e))?,
    ];
    records_for(VQC, k, config.shots, config.seeds[i], p, preds, elapsed_ms(start))
}

fn train_svm(config: &ExperimentConfig, p: &Prepared, k: usize, i: usize) -> StageResult<Vec<Record>> {
    let start = Instant::now();
    let model = svm::train_svm(&p.train, &SvmConfig::with_c(config.svm_c)).map_err(|e| ("train", e))?;
    let preds = [
        model.predict(p.train.features()).map_err(|e| ("predict", e))?,
        model.predict(p.test.features()).map_err(|e| ("predict", e))?,
    ];
    records_for(SVM, k, 0, config.seeds[i], p, preds, elapsed_ms(start))
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}
