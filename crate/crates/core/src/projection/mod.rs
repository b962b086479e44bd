//! Learning the filter matrix `W` and the per-sense diagonal projections.
//!
//! For a record with context vector `c`, static vector `g` and gold sense `i`, the
//! alignment term is `‖W·c − f(a_i ⊙ g)‖²`, where `a_i` is the diagonal of the sense's
//! projection and `f` is linear, ReLU or GELU.

mod activation;
mod adam;
mod model;
mod train;

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use activation::Activation;
pub use adam::{Adam, AdamParams, Moments};
pub use model::{Forward, Gradients, ProjectionModel, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use train::{adam_step, train, train_from, trainable_senses, TrainConfig, TrainReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitScheme {
    /// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
    Xavier,
    /// Uniform in `[0, 1]`.
    Uniform01,
}

impl FromStr for InitScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "xavier" => Ok(InitScheme::Xavier),
            "uniform01" | "uniform" => Ok(InitScheme::Uniform01),
            other => Err(format!("unknown init scheme `{other}` (xavier, uniform01)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProjectionError {
    #[error("duplicate sense id `{0}`")]
    DuplicateSense(String),
    #[error("sense `{0}` has no diagonal in the model")]
    UnknownSense(String),
    #[error("record `{0}` has no gold sense")]
    MissingGold(String),
    #[error("{what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite parameter in `{0}`")]
    NonFiniteParameter(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("no usable training records after filtering")]
    NoTrainingRecords,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = ProjectionError> = std::result::Result<T, E>;
