use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_yaml::Value;

use super::RunError;
use crate::hyperopt::SearchConfig;
use crate::labels::{Repair, EMPTY_SYMBOL, JOIN_SYMBOL};
use crate::metrics::MetricKind;
use crate::network::{CellKind, CharConfig, DropoutConfig, HeadKind, PrivateLayer};
use crate::training::{EarlyStoppingConfig, OptimizerConfig};

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

fn first_layer() -> usize {
    1
}

/// Everything a training run needs, read from one YAML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output directory of `train`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub tasks: Vec<TaskConfig>,
    #[serde(default)]
    pub embeddings: Option<EmbeddingConfig>,
    pub network: NetworkSection,
    #[serde(default)]
    pub regularization: Regularization,
    pub training: TrainingSection,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    /// Random search settings, used by `search` only.
    #[serde(default)]
    pub search: Option<SearchConfig>,
}

/// A task with its files, label column and task-specific layers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub name: String,
    pub train: PathBuf,
    #[serde(default)]
    pub dev: Option<PathBuf>,
    #[serde(default)]
    pub test: Option<PathBuf>,
    #[serde(default)]
    pub token_column: usize,
    pub label_column: usize,
    /// Share of training documents kept after a seeded shuffle.
    #[serde(default = "one")]
    pub train_fraction: f64,
    /// Shared layer (1-based) feeding the task.
    #[serde(default = "first_layer")]
    pub layer: usize,
    #[serde(default)]
    pub private: Vec<PrivateLayer>,
    #[serde(default)]
    pub head: HeadKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// Files combined over their common vocabulary.
    pub files: Vec<PathBuf>,
    /// Keep only words that occur in some corpus of the run.
    #[serde(default)]
    pub prune: bool,
    #[serde(default = "yes")]
    pub train: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(default)]
    pub cell: CellKind,
    pub shared_layers: Vec<usize>,
    #[serde(default)]
    pub shortcuts: bool,
    /// Ignored when embeddings are loaded.
    #[serde(default)]
    pub word_dim: Option<usize>,
    #[serde(default)]
    pub chars: Option<CharConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Regularization {
    pub dropout: DropoutConfig,
    /// Dropout on each task's projection output, by task name.
    pub task_dropout: std::collections::BTreeMap<String, f64>,
    /// Global-norm clip threshold.
    pub clip: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    pub epochs: usize,
    pub batch_size: usize,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub main_task: String,
    #[serde(default)]
    pub early_stopping: Option<EarlyStoppingConfig>,
    #[serde(default)]
    pub seed: u64,
    /// Directory for parsed-corpus caches.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// The first metric is the run's dev score.
    pub metrics: Vec<MetricKind>,
    pub bio_repair: Option<Repair>,
    pub am_postprocess: bool,
    pub empty_symbol: String,
    pub join_symbol: String,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            metrics: vec![MetricKind::F1],
            bio_repair: None,
            am_postprocess: true,
            empty_symbol: EMPTY_SYMBOL.to_owned(),
            join_symbol: JOIN_SYMBOL.to_owned(),
        }
    }
}

impl RunConfig {
    /// Parses YAML text, applies `key.path=value` overrides and validates.
    pub fn from_yaml(text: &str, overrides: &[String]) -> Result<Self, RunError> {
        let mut value: Value = serde_yaml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig = from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn task(&self, name: &str) -> Option<&TaskConfig> {
        self.tasks.iter().find(|t| t.name == name)
    }

    /// Checks everything that can be checked without reading data.
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        if self.tasks.is_empty() {
            return bad("at least one task is required".into());
        }
        let mut names = BTreeSet::new();
        let layers = self.network.shared_layers.len();
        if layers == 0 || self.network.shared_layers.contains(&0) {
            return bad("network.shared_layers needs at least one nonzero layer size".into());
        }
        for t in &self.tasks {
            if !names.insert(t.name.as_str()) {
                return bad(format!("task {:?} is declared twice", t.name));
            }
            if !(t.train_fraction > 0.0 && t.train_fraction <= 1.0) {
                return bad(format!("task {:?}: train_fraction must lie in (0, 1]", t.name));
            }
            if t.layer == 0 || t.layer > layers {
                return bad(format!("task {:?}: layer {} is not in 1..={layers}", t.name, t.layer));
            }
        }
        for name in self.regularization.task_dropout.keys() {
            if !names.contains(name.as_str()) {
                return bad(format!("regularization.task_dropout names unknown task {name:?}"));
            }
        }
        if !names.contains(self.training.main_task.as_str()) {
            return bad(format!("main task {:?} is not declared", self.training.main_task));
        }
        if self.training.epochs == 0 || self.training.batch_size == 0 {
            return bad("training.epochs and training.batch_size must be at least 1".into());
        }
        if let Some(es) = &self.training.early_stopping {
            match self.task(&es.task) {
                None => return bad(format!("early stopping task {:?} is not declared", es.task)),
                Some(t) if t.dev.is_none() => {
                    return bad(format!("early stopping task {:?} has no dev file", es.task))
                }
                _ => {}
            }
            if es.patience == 0 {
                return bad("early stopping patience must be at least 1".into());
            }
        }
        if self.embeddings.is_none() && self.network.word_dim.unwrap_or(0) == 0 {
            return bad("network.word_dim is required without embeddings".into());
        }
        if self.evaluation.metrics.is_empty() {
            return bad("evaluation.metrics must name at least one metric".into());
        }
        self.training.optimizer.validate().map_err(RunError::Config)?;
        if let Some(s) = &self.search {
            s.validate().map_err(|e| RunError::Config(e.to_string()))?;
        }
        Ok(())
    }
}

/// Deserializes with the dotted path of the offending key in errors.
pub fn from_value<T: serde::de::DeserializeOwned>(value: Value) -> Result<T, RunError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        if path == "." || path.is_empty() {
            RunError::Config(e.into_inner().to_string())
        } else {
            RunError::Config(format!("at {path}: {}", e.into_inner()))
        }
    })
}

/// Sets one leaf of a YAML tree from `dotted.path=value`. Numeric path
/// segments index into sequences.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), RunError> {
    let bad = |m: String| RunError::Config(format!("override {spec:?}: {m}"));
    let (path, raw) = spec.split_once('=').ok_or_else(|| bad("expected key.path=value".into()))?;
    let new: Value = serde_yaml::from_str(raw).map_err(|e| bad(e.to_string()))?;
    let segments: Vec<&str> = path.trim().split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(bad("empty path segment".into()));
    }
    let mut cur = root;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        cur = match cur {
            Value::Mapping(m) => {
                let key = Value::from(*seg);
                if !m.contains_key(&key) {
                    m.insert(key.clone(), if last { Value::Null } else { Value::Mapping(Default::default()) });
                }
                m.get_mut(&key).expect("inserted above")
            }
            Value::Sequence(s) => {
                let k: usize = seg.parse().map_err(|_| bad(format!("{seg:?} does not index a list")))?;
                let len = s.len();
                s.get_mut(k).ok_or_else(|| bad(format!("index {k} is out of range for a list of {len}")))?
            }
            Value::Null if !last => {
                *cur = Value::Mapping(Default::default());
                let Value::Mapping(m) = cur else { unreachable!() };
                m.entry(Value::from(*seg)).or_insert(Value::Null)
            }
            _ => return Err(bad(format!("{:?} is not a section", segments[..i].join(".")))),
        };
    }
    if matches!(cur, Value::Mapping(_)) {
        return Err(bad("target is a section, not a value".into()));
    }
    *cur = new;
    Ok(())
}
