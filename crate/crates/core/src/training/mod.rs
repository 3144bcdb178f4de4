//! Training loop, optimizers, early stopping and checkpoints.

mod checkpoint;
mod data;
mod early;
mod grads;
mod optim;
mod scorer;
mod train;

use thiserror::Error;

use crate::metrics::MetricsError;
use crate::network::NetworkError;

pub use checkpoint::{
    decode_model, encode_model, load_model, save_model, CheckpointError, CHECKPOINT_FILE, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use data::{subsample_documents, Example, TaskData};
pub use early::{EarlyStopping, EarlyStoppingConfig, Observation};
pub use grads::{clip_global_norm, GradientSet};
pub use optim::{Optimizer, OptimizerConfig};
pub use scorer::{result_list, DevScorer, MetricScorer, ScriptedScorer};
pub use train::{train, train_single_task, EpochLog, TrainConfig, TrainHooks, TrainOutcome};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("non-finite loss or gradient in epoch {epoch}, task {task:?}, batch {batch}")]
    NonFinite { epoch: usize, task: String, batch: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}
