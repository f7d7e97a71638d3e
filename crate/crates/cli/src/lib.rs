//! Experiment runner: sweeps feature counts and seeds, trains the VQC and the
//! linear SVM on identical scaled features, and writes a results JSON plus
//! per-metric plot CSVs.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

pub use config::{DataSource, ExperimentConfig};
pub use output::{Failure, Record, Results, Split};
pub use run::{run_experiment, run_sweep, RunOutcome};

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    /// A pipeline stage outside the per-cell loop failed.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: vqcsvm_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn stage(stage: &'static str, source: vqcsvm_core::Error) -> Self {
        CliError::Stage { stage, source }
    }
}
