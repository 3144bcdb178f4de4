//! Random hyper-parameter search over templated run configurations.

mod search;
mod space;
mod template;

use std::path::PathBuf;

use thiserror::Error;

pub use search::{derive_seed, plan_trials, run_search, PlannedTrial, RunRequest, SearchConfig, SearchReport, TrialRecord};
pub use space::{Assignment, Interval, SearchSpace};
pub use template::{mask_template, render_template, template_variables, yaml_scalar};

#[derive(Debug, Error)]
pub enum HyperoptError {
    #[error("invalid search space: {0}")]
    Space(String),
    #[error("template variable ${{{0}}} is not defined in the search space")]
    Unbound(String),
    #[error("invalid trial configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
