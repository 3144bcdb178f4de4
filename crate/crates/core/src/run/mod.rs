//! YAML run configurations and the end-to-end train/evaluate pipeline.

mod config;
mod pipeline;

use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::{CacheError, CorpusError};
use crate::metrics::MetricsError;
use crate::network::NetworkError;
use crate::numeric::NumericError;
use crate::training::{CheckpointError, TrainError};

pub use config::{
    apply_override, from_value, EmbeddingConfig, EvaluationConfig, NetworkSection, Regularization, RunConfig,
    TaskConfig, TrainingSection,
};
pub use pipeline::{
    load_corpora, metric_options, run_experiment, run_search_experiment, run_with_corpora, scores_tsv, RunOutcome,
    ScoreRow, TaskCorpora,
};

/// Failure of a run, grouped by who has to fix it.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit status: 1 configuration, 2 data and I/O, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Data(_) | RunError::Io { .. } => 2,
            RunError::Numeric(_) => 3,
        }
    }
}

impl From<CorpusError> for RunError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io { path, source } => RunError::Io { path, source },
            other => RunError::Data(other.to_string()),
        }
    }
}

impl From<CacheError> for RunError {
    fn from(e: CacheError) -> Self {
        match e {
            CacheError::Io { path, source } => RunError::Io { path, source },
            CacheError::Corpus(c) => c.into(),
            other => RunError::Data(other.to_string()),
        }
    }
}

impl From<MetricsError> for RunError {
    fn from(e: MetricsError) -> Self {
        RunError::Data(e.to_string())
    }
}

impl From<CheckpointError> for RunError {
    fn from(e: CheckpointError) -> Self {
        match e {
            CheckpointError::Io { path, source } => RunError::Io { path, source },
            other => RunError::Data(other.to_string()),
        }
    }
}

impl From<NetworkError> for RunError {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::Config(m) => RunError::Config(m),
            NetworkError::Numeric(n @ (NumericError::NonFinite { .. } | NumericError::NonFiniteAdjoint(_))) => {
                RunError::Numeric(n.to_string())
            }
            other => RunError::Data(other.to_string()),
        }
    }
}

impl From<TrainError> for RunError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Config(m) => RunError::Config(m),
            TrainError::Data(m) => RunError::Data(m),
            n @ TrainError::NonFinite { .. } => RunError::Numeric(n.to_string()),
            TrainError::Network(n) => n.into(),
            TrainError::Checkpoint(c) => c.into(),
            TrainError::Metrics(m) => m.into(),
        }
    }
}
