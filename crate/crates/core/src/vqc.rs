//! Variational quantum classifier.
//!
//! A sample is encoded by the feature map, evolved by the ansatz and read out
//! in the computational basis. Outcomes are split into two classes by a
//! [`Readout`] rule; the fraction landing in the `+1` class is `p̂(+1 | x)`.
//! With `shots = 0` the exact probabilities are summed instead of sampled.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{self, AnsatzSpec, Circuit, DataMap, FeatureMapSpec};
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::kv::{KvMap, KvWriter};
use crate::optimizer::{self, OptimizerConfig, Termination};
use crate::statevector::{self, Statevector};
use crate::{rng, Classifier};

/// Clamp applied to probabilities before taking logs.
pub const LOSS_EPSILON: f64 = 1e-9;

/// Which measured bitstrings count toward the `+1` class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// Even number of 1 bits.
    #[default]
    Parity,
    /// Qubit 0 measured as 0.
    FirstQubit,
}

impl Readout {
    pub fn is_positive(self, basis: usize) -> bool {
        match self {
            Readout::Parity => basis.count_ones() % 2 == 0,
            Readout::FirstQubit => basis & 1 == 0,
        }
    }
}

impl fmt::Display for Readout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Readout::Parity => "parity",
            Readout::FirstQubit => "first_qubit",
        })
    }
}

impl FromStr for Readout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "parity" => Ok(Readout::Parity),
            "first_qubit" => Ok(Readout::FirstQubit),
            other => Err(Error::config(format!("unknown readout {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    #[default]
    CrossEntropy,
    ErrorRate,
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::CrossEntropy => "cross_entropy",
            Loss::ErrorRate => "error_rate",
        })
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cross_entropy" => Ok(Loss::CrossEntropy),
            "error_rate" => Ok(Loss::ErrorRate),
            other => Err(Error::config(format!("unknown loss {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialTheta {
    #[default]
    Zeros,
    /// Uniform in `[−π, π]` from the given seed.
    SeededUniform { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub optimizer: OptimizerConfig,
    pub initial_theta: InitialTheta,
    pub loss: Loss,
    /// Shots per loss evaluation; 0 uses exact probabilities. The trained
    /// model keeps the same shot count for prediction.
    pub shots: u64,
    /// Seed for shot sampling, stored on the trained model.
    pub seed: u64,
    pub readout: Readout,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerConfig::default(),
            initial_theta: InitialTheta::Zeros,
            loss: Loss::CrossEntropy,
            shots: 1024,
            seed: 0,
            readout: Readout::Parity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqcModel {
    pub feature_map: FeatureMapSpec,
    pub ansatz: AnsatzSpec,
    pub theta: Vec<f64>,
    /// 0 selects exact-probability mode.
    pub shots: u64,
    pub decision_threshold: f64,
    pub seed: u64,
    pub readout: Readout,
}

impl VqcModel {
    /// Exact-mode model with threshold 0.5 and parity readout.
    pub fn new(feature_map: FeatureMapSpec, ansatz: AnsatzSpec, theta: Vec<f64>) -> Result<Self> {
        let model = VqcModel {
            feature_map,
            ansatz,
            theta,
            shots: 0,
            decision_threshold: 0.5,
            seed: 0,
            readout: Readout::Parity,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_shots(mut self, shots: u64, seed: u64) -> Self {
        self.shots = shots;
        self.seed = seed;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        self.decision_threshold = threshold;
        self.validate()?;
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.feature_map.num_qubits
    }

    pub fn validate(&self) -> Result<()> {
        self.feature_map.validate()?;
        self.ansatz.validate()?;
        if self.feature_map.num_qubits != self.ansatz.num_qubits {
            return Err(Error::config(format!(
                "feature map has {} qubits but ansatz has {}",
                self.feature_map.num_qubits, self.ansatz.num_qubits
            )));
        }
        if self.theta.len() != self.ansatz.parameter_count() {
            return Err(Error::config(format!(
                "theta has {} entries, ansatz needs {}",
                self.theta.len(),
                self.ansatz.parameter_count()
            )));
        }
        if !(self.decision_threshold > 0.0 && self.decision_threshold < 1.0) {
            return Err(Error::config(format!("decision threshold {} not in (0, 1)", self.decision_threshold)));
        }
        Ok(())
    }

    /// Feature map followed by the ansatz for one sample.
    pub fn circuit(&self, x: &[f64]) -> Result<Circuit> {
        let mut c = circuits::build_feature_map(x, &self.feature_map)?;
        c.extend(&circuits::build_ansatz(&self.theta, &self.ansatz)?)?;
        Ok(c)
    }

    /// `p̂(+1 | x)`. `index` selects the shot-sampling stream and is ignored
    /// in exact mode.
    pub fn predict_proba(&self, x: &[f64], index: usize) -> Result<f64> {
        let encoded = encode(x, &self.feature_map)?;
        let ansatz = circuits::build_ansatz(&self.theta, &self.ansatz)?;
        let state = ansatz.run(&encoded)?;
        Ok(readout_probability(&state, self.readout, self.shots, sample_seed(self.seed, index)))
    }

    /// `+1` iff `p̂(+1 | x) ≥ decision_threshold`.
    pub fn classify(&self, x: &[f64], index: usize) -> Result<Label> {
        let p = self.predict_proba(x, index)?;
        Ok(if p >= self.decision_threshold { Label::Positive } else { Label::Negative })
    }

    /// `p̂(+1)` for every row; row `i` uses sampling stream `i`.
    pub fn predict_proba_all(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let ansatz = circuits::build_ansatz(&self.theta, &self.ansatz)?;
        rows.iter()
            .enumerate()
            .map(|(i, x)| {
                let state = ansatz.run(&encode(x, &self.feature_map)?)?;
                Ok(readout_probability(&state, self.readout, self.shots, sample_seed(self.seed, i)))
            })
            .collect()
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Label>> {
        Ok(self
            .predict_proba_all(rows)?
            .into_iter()
            .map(|p| if p >= self.decision_threshold { Label::Positive } else { Label::Negative })
            .collect())
    }

    pub fn to_kv(&self) -> String {
        let mut w = KvWriter::new();
        w.put("model", "vqc")
            .put("num_qubits", self.num_qubits())
            .put("layers", self.ansatz.layers)
            .put("data_map", self.feature_map.data_map)
            .put("repetitions", self.feature_map.repetitions);
        let pairs: Vec<String> = self.feature_map.pairs.iter().map(|(i, j)| format!("{i}-{j}")).collect();
        w.put_list("pairs", &pairs);
        w.put_indexed_f64("theta", &self.theta)
            .put_f64("threshold", self.decision_threshold)
            .put("shots", self.shots)
            .put("seed", self.seed)
            .put("readout", self.readout);
        w.finish()
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let kv = KvMap::parse(text)?;
        if kv.require_str("model")? != "vqc" {
            return Err(Error::config("not a vqc model"));
        }
        let n: usize = kv.require("num_qubits")?;
        let data_map: DataMap = kv.require_str("data_map")?.parse()?;
        let mut feature_map = FeatureMapSpec::new(n, data_map).with_repetitions(kv.require("repetitions")?);
        if let Some(pairs) = kv.get_list::<String>("pairs")? {
            feature_map.pairs = pairs
                .iter()
                .map(|p| {
                    let (i, j) = p.split_once('-').ok_or_else(|| Error::config(format!("bad pair {p:?}")))?;
                    let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::config(format!("bad pair {p:?}: {e}")));
                    Ok((parse(i)?, parse(j)?))
                })
                .collect::<Result<_>>()?;
        }
        let model = VqcModel {
            feature_map,
            ansatz: AnsatzSpec::new(n, kv.require("layers")?),
            theta: kv.get_indexed("theta")?,
            shots: kv.require("shots")?,
            decision_threshold: kv.require("threshold")?,
            seed: kv.require("seed")?,
            readout: kv.get_or("readout", Readout::Parity)?,
        };
        model.validate()?;
        Ok(model)
    }
}

impl Classifier for VqcModel {
    fn classify_row(&self, x: &[f64], index: usize) -> Result<Label> {
        self.classify(x, index)
    }
}

fn encode(x: &[f64], spec: &FeatureMapSpec) -> Result<Statevector> {
    circuits::build_feature_map(x, spec)?.run(&Statevector::zero_state(spec.num_qubits)?)
}

/// Seed of the sampling stream for sample `index`.
pub fn sample_seed(model_seed: u64, index: usize) -> u64 {
    rng::derive_seed(model_seed, &[index as u64])
}

fn readout_probability(state: &Statevector, readout: Readout, shots: u64, stream_seed: u64) -> f64 {
    let probs = state.probabilities();
    if shots == 0 {
        return probs.iter().enumerate().filter(|(b, _)| readout.is_positive(*b)).map(|(_, p)| p).sum();
    }
    let mut hits = 0u64;
    statevector::sample_into(&probs, shots, stream_seed, |b| {
        if readout.is_positive(b) {
            hits += 1;
        }
    });
    hits as f64 / shots as f64
}

fn sample_loss(p: f64, y: Label, loss: Loss, threshold: f64) -> f64 {
    match loss {
        Loss::CrossEntropy => {
            let p = p.clamp(LOSS_EPSILON, 1.0 - LOSS_EPSILON);
            match y {
                Label::Positive => -p.ln(),
                Label::Negative => -(1.0 - p).ln(),
            }
        }
        Loss::ErrorRate => {
            let predicted = if p >= threshold { Label::Positive } else { Label::Negative };
            (predicted != y) as u8 as f64
        }
    }
}

/// Mean loss from per-sample `p̂(+1)` values.
pub fn loss_from_probabilities(probs: &[f64], labels: &[Label], loss: Loss, threshold: f64) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::argument("loss over an empty dataset"));
    }
    if probs.len() != labels.len() {
        return Err(Error::Dimension { expected: labels.len(), actual: probs.len() });
    }
    let total: f64 = probs.iter().zip(labels).map(|(&p, &y)| sample_loss(p, y, loss, threshold)).sum();
    Ok(total / probs.len() as f64)
}

/// Training loss of `template` with its parameters replaced by `theta`,
/// using the shot count, seed and readout from `config`.
pub fn loss(theta: &[f64], dataset: &Dataset, template: &VqcModel, config: &TrainConfig) -> Result<f64> {
    let model = VqcModel {
        theta: theta.to_vec(),
        shots: config.shots,
        seed: config.seed,
        readout: config.readout,
        ..template.clone()
    };
    model.validate()?;
    let probs = model.predict_proba_all(dataset.features())?;
    loss_from_probabilities(&probs, dataset.labels(), config.loss, model.decision_threshold)
}

/// Fit θ on an already-scaled dataset.
///
/// Each sample's encoded state is computed once; every loss evaluation reuses
/// the same per-sample sampling streams, so the objective is a deterministic
/// function of θ. If the optimizer aborts, the error carries the model at the
/// best parameters seen.
pub fn train(dataset: &Dataset, feature_map: &FeatureMapSpec, ansatz: &AnsatzSpec, config: &TrainConfig) -> Result<VqcModel> {
    if dataset.is_empty() {
        return Err(Error::argument("cannot train on an empty dataset"));
    }
    if dataset.n_features() != feature_map.num_qubits {
        return Err(Error::Dimension { expected: feature_map.num_qubits, actual: dataset.n_features() });
    }
    let theta0 = match config.initial_theta {
        InitialTheta::Zeros => vec![0.0; ansatz.parameter_count()],
        InitialTheta::SeededUniform { seed } => {
            let mut r = rng::seeded(seed);
            (0..ansatz.parameter_count())
                .map(|_| r.random_range(-std::f64::consts::PI..=std::f64::consts::PI))
                .collect()
        }
    };
    let template = VqcModel {
        feature_map: feature_map.clone(),
        ansatz: *ansatz,
        theta: theta0.clone(),
        shots: config.shots,
        decision_threshold: 0.5,
        seed: config.seed,
        readout: config.readout,
    };
    template.validate()?;

    let encoded: Vec<Statevector> =
        dataset.features().iter().map(|x| encode(x, feature_map)).collect::<Result<_>>()?;
    let seeds: Vec<u64> = (0..encoded.len()).map(|i| sample_seed(config.seed, i)).collect();
    let labels = dataset.labels();
    let mut state = Statevector::zero_state(feature_map.num_qubits)?;
    let objective = |theta: &[f64]| -> f64 {
        let Ok(circuit) = circuits::build_ansatz(theta, ansatz) else {
            return f64::NAN;
        };
        let mut total = 0.0;
        for (i, psi) in encoded.iter().enumerate() {
            state.clone_from(psi);
            for g in circuit.gates() {
                state.apply_in_place(g).expect("ansatz gates validated on construction");
            }
            let p = readout_probability(&state, config.readout, config.shots, seeds[i]);
            total += sample_loss(p, labels[i], config.loss, template.decision_threshold);
        }
        total / encoded.len() as f64
    };
    let result = optimizer::minimize(objective, &theta0, &config.optimizer)?;
    let model = VqcModel { theta: result.best_point, ..template };
    if result.termination == Termination::NonFinite {
        return Err(Error::TrainingAborted {
            reason: format!("non-finite loss after {} evaluations", result.evaluations_used),
            best: Box::new(model),
        });
    }
    Ok(model)
}
