//! The multi-task BiRNN tagger.

mod cells;
mod config;
mod model;
mod params;

use thiserror::Error;

use crate::numeric::NumericError;

pub use cells::{cell_step, init_cell, project_inputs, step_projected, CellState, CellVars};
pub use config::{Activation, CellKind, CharConfig, DropoutConfig, HeadKind, NetworkConfig, PrivateLayer, TaskSpec};
pub use model::{Encoded, Forward, Tagger, EMBEDDING_INIT};
pub use params::ParamStore;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid network configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("task {task:?} has no label {label:?}")]
    UnknownLabel { task: String, label: String },
}
