use std::path::PathBuf;

use crate::vqc::VqcModel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A spec or config value is outside its allowed range.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitIndex { index: usize, num_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// The optimizer aborted; `best` holds the model at the best point seen.
    #[error("training aborted: {reason}")]
    TrainingAborted { reason: String, best: Box<VqcModel> },

    #[error("SMO did not converge after {passes} passes (max KKT violation {max_violation:.3e})")]
    SvmNotConverged { passes: usize, max_violation: f64 },

    #[error("{path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
