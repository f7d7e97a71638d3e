//! Building blocks for comparing a variational quantum classifier against a
//! linear-kernel SVM on small tabular datasets.
//!
//! The crate is organised bottom-up:
//!
//! * [`statevector`] – dense pure-state simulator with seeded shot sampling.
//! * [`circuits`] – feature-map and ansatz circuit construction.
//! * [`optimizer`] – derivative-free minimisation (COBYLA, SPSA).
//! * [`vqc`] – the variational classifier and its training loop.
//! * [`svm`] – soft-margin linear SVM trained with SMO.
//! * [`preprocess`] – min-max scaling and feature ranking.
//! * [`data`] – CSV ingestion, stratified splitting, synthetic cohorts.
//! * [`metrics`] – confusion counts and accuracy/precision/recall/F1.

pub mod circuits;
pub mod data;
pub mod error;
pub mod kv;
pub mod metrics;
pub mod optimizer;
pub mod preprocess;
pub mod rng;
pub mod statevector;
pub mod svm;
pub mod vqc;

pub use circuits::{AnsatzSpec, Circuit, DataMap, FeatureMapSpec};
pub use data::{Dataset, Label, SynthSpec};
pub use error::{Error, Result};
pub use metrics::{ConfusionCounts, Metrics, MetricsRecord};
pub use optimizer::{Method, OptimizationResult, OptimizerConfig};
pub use preprocess::{FeatureRanking, ScalerParams};
pub use statevector::{CountsHistogram, GateOp, Statevector};
pub use svm::SvmModel;
pub use vqc::{TrainConfig, VqcModel};

/// Anything that maps a feature row to a ±1 label.
///
/// `index` identifies the row within its dataset; shot-based models use it to
/// derive a per-sample sampling seed so that results do not depend on
/// evaluation order.
pub trait Classifier {
    fn classify_row(&self, x: &[f64], index: usize) -> Result<Label>;
}
