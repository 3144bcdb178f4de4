use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::NetworkError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Simple,
    #[default]
    Lstm,
    Gru,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    #[default]
    Softmax,
    Crf,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Sigmoid,
    Tanh,
    Relu,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivateLayer {
    pub units: usize,
    #[serde(default)]
    pub activation: Activation,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DropoutConfig {
    /// Probability of zeroing a whole word vector.
    pub word: f64,
    pub rnn_input: f64,
    pub rnn_state: f64,
    pub rnn_output: f64,
    /// Reuse one mask per sequence instead of one per time step.
    pub variational: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharConfig {
    /// Character embedding width.
    pub dim: usize,
    /// Hidden units per direction of the character BiLSTM.
    pub hidden: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub name: String,
    pub labels: Vec<String>,
    /// 1-based index of the shared layer feeding this task.
    pub layer: usize,
    #[serde(default)]
    pub private: Vec<PrivateLayer>,
    #[serde(default)]
    pub head: HeadKind,
    /// Dropout on the projection output.
    #[serde(default)]
    pub dropout: f64,
}

impl TaskSpec {
    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub cell: CellKind,
    /// Hidden units per direction of each shared layer.
    pub shared_layers: Vec<usize>,
    #[serde(default)]
    pub shortcuts: bool,
    /// Word vector width when no pre-trained embeddings are given.
    pub word_dim: usize,
    #[serde(default = "yes")]
    pub train_embeddings: bool,
    #[serde(default)]
    pub chars: Option<CharConfig>,
    #[serde(default)]
    pub dropout: DropoutConfig,
    pub tasks: Vec<TaskSpec>,
}

fn yes() -> bool {
    true
}

fn probability(name: &str, p: f64) -> Result<(), NetworkError> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(NetworkError::Config(format!("{name} must lie in [0, 1), got {p}")))
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<(), NetworkError> {
        let bad = |m: String| Err(NetworkError::Config(m));
        if self.shared_layers.is_empty() {
            return bad("at least one shared layer is required".into());
        }
        if self.shared_layers.contains(&0) || self.word_dim == 0 {
            return bad("layer sizes must be positive".into());
        }
        if let Some(c) = self.chars {
            if c.dim == 0 || c.hidden == 0 {
                return bad("character dimensions must be positive".into());
            }
        }
        let d = &self.dropout;
        probability("dropout.word", d.word)?;
        probability("dropout.rnn_input", d.rnn_input)?;
        probability("dropout.rnn_state", d.rnn_state)?;
        probability("dropout.rnn_output", d.rnn_output)?;
        if self.tasks.is_empty() {
            return bad("at least one task is required".into());
        }
        let mut names = HashSet::new();
        for t in &self.tasks {
            if !names.insert(t.name.as_str()) {
                return bad(format!("duplicate task {:?}", t.name));
            }
            if t.labels.is_empty() {
                return bad(format!("task {:?} has no labels", t.name));
            }
            if t.layer == 0 || t.layer > self.shared_layers.len() {
                return bad(format!(
                    "task {:?} terminates at layer {}, but there are {} shared layers",
                    t.name,
                    t.layer,
                    self.shared_layers.len()
                ));
            }
            if t.private.iter().any(|p| p.units == 0) {
                return bad(format!("task {:?} has an empty private layer", t.name));
            }
            probability(&format!("dropout of task {:?}", t.name), t.dropout)?;
        }
        let deepest = self.tasks.iter().map(|t| t.layer).max().unwrap_or(0);
        if deepest != self.shared_layers.len() {
            return bad(format!(
                "{} shared layers configured but the deepest task terminates at layer {deepest}",
                self.shared_layers.len()
            ));
        }
        Ok(())
    }

    pub fn task_index(&self, name: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.name == name)
    }

    /// Width of the word representation fed to the first shared layer.
    pub fn input_dim(&self, word_dim: usize) -> usize {
        word_dim + self.chars.map_or(0, |c| 2 * c.hidden)
    }

    /// Input width of shared layer `l` (0-based).
    pub fn layer_input_dim(&self, l: usize, word_dim: usize) -> usize {
        let input = self.input_dim(word_dim);
        match l {
            0 => input,
            _ if self.shortcuts => 2 * self.shared_layers[l - 1] + input,
            _ => 2 * self.shared_layers[l - 1],
        }
    }
}
