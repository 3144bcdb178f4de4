use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cells::{glorot, init_cell, project_inputs, step_projected, CellState, CellVars};
use super::{Activation, CellKind, HeadKind, NetworkConfig, NetworkError, ParamStore};
use crate::corpus::{EmbeddingSet, Sentence, Vocabulary, PAD};
use crate::numeric::{CrfScores, Graph, ParamId, Tensor, Var};

/// Half-width of the uniform range for embeddings without a pre-trained
/// vector.
pub const EMBEDDING_INIT: f64 = 0.05;

/// Word and character indices of one sentence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Encoded {
    pub words: Vec<usize>,
    pub chars: Vec<Vec<usize>>,
}

impl Encoded {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
struct CellIds {
    kind: CellKind,
    hidden: usize,
    ids: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
struct TaskIds {
    private: Vec<usize>,
    proj_w: usize,
    proj_b: usize,
    /// Transitions, begin and end scores.
    crf: Option<[usize; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
struct Layout {
    words: usize,
    chars: Option<(usize, CellIds, CellIds)>,
    layers: Vec<[CellIds; 2]>,
    tasks: Vec<TaskIds>,
}

/// The multi-task tagger: configuration, vocabularies and parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Tagger {
    pub config: NetworkConfig,
    pub vocab: Vocabulary,
    pub params: ParamStore,
    layout: Layout,
}

fn add_cell(store: &mut ParamStore, prefix: &str, kind: CellKind, k: usize, h: usize, rng: &mut ChaCha8Rng) -> CellIds {
    let ids = init_cell(kind, k, h, rng)
        .into_iter()
        .map(|(suffix, t)| store.add(format!("{prefix}.{suffix}"), t, true))
        .collect();
    CellIds { kind, hidden: h, ids }
}

impl Tagger {
    /// Initialises all parameters. Draw order on `rng`: word vectors
    /// without a pre-trained value (row by row), character table, shared
    /// layers (forward then backward cell per layer), then per task its
    /// private layers and projection.
    pub fn new(
        mut config: NetworkConfig,
        vocab: Vocabulary,
        embeddings: Option<&EmbeddingSet>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, NetworkError> {
        if let Some(e) = embeddings {
            config.word_dim = e.dim();
        }
        config.validate()?;
        let mut store = ParamStore::default();
        let d = config.word_dim;

        let mut table = Tensor::zeros(vocab.words.len(), d);
        for (i, w) in vocab.words.items().iter().enumerate() {
            if i == PAD {
                continue;
            }
            match embeddings.and_then(|e| e.vector(w)) {
                Some(v) => table.row_slice_mut(i).copy_from_slice(v),
                None => {
                    for x in table.row_slice_mut(i) {
                        *x = rng.gen_range(-EMBEDDING_INIT..=EMBEDDING_INIT);
                    }
                }
            }
        }
        let words = store.add("embeddings.words", table, config.train_embeddings);

        let chars = config.chars.map(|c| {
            let emb = store.add(
                "chars.embeddings",
                Tensor::uniform(vocab.chars.len(), c.dim, EMBEDDING_INIT, rng),
                true,
            );
            let fwd = add_cell(&mut store, "chars.fwd", CellKind::Lstm, c.dim, c.hidden, rng);
            let bwd = add_cell(&mut store, "chars.bwd", CellKind::Lstm, c.dim, c.hidden, rng);
            (emb, fwd, bwd)
        });

        let mut layers = Vec::new();
        for (l, &h) in config.shared_layers.iter().enumerate() {
            let k = config.layer_input_dim(l, d);
            let fwd = add_cell(&mut store, &format!("shared.{l}.fwd"), config.cell, k, h, rng);
            let bwd = add_cell(&mut store, &format!("shared.{l}.bwd"), config.cell, k, h, rng);
            layers.push([fwd, bwd]);
        }

        let mut tasks = Vec::new();
        for t in &config.tasks {
            let mut width = 2 * config.shared_layers[t.layer - 1];
            let mut private = Vec::new();
            for (i, p) in t.private.iter().enumerate() {
                private.push(store.add(format!("task.{}.private.{i}.W", t.name), glorot(width, p.units, rng), true));
                width = p.units;
            }
            let n = t.labels.len();
            let proj_w = store.add(format!("task.{}.proj.W", t.name), glorot(width, n, rng), true);
            let proj_b = store.add(format!("task.{}.proj.b", t.name), Tensor::zeros(1, n), true);
            let crf = (t.head == HeadKind::Crf).then(|| {
                [
                    store.add(format!("task.{}.crf.transitions", t.name), Tensor::zeros(n, n), true),
                    store.add(format!("task.{}.crf.begin", t.name), Tensor::zeros(1, n), true),
                    store.add(format!("task.{}.crf.end", t.name), Tensor::zeros(1, n), true),
                ]
            });
            tasks.push(TaskIds {
                private,
                proj_w,
                proj_b,
                crf,
            });
        }

        Ok(Tagger {
            config,
            vocab,
            params: store,
            layout: Layout {
                words,
                chars,
                layers,
                tasks,
            },
        })
    }

    /// Replaces all parameter values, checking names and shapes against
    /// the model's registry.
    pub fn with_params(mut self, tensors: Vec<(String, Tensor)>) -> Result<Self, NetworkError> {
        if tensors.len() != self.params.len() {
            return Err(NetworkError::Config(format!(
                "expected {} parameter tensors, got {}",
                self.params.len(),
                tensors.len()
            )));
        }
        for (id, (name, t)) in tensors.into_iter().enumerate() {
            let expected = self.params.get(id);
            if name != self.params.name(id) || t.shape() != expected.shape() {
                return Err(NetworkError::Config(format!(
                    "parameter {id}: expected {} {:?}, got {name} {:?}",
                    self.params.name(id),
                    expected.shape(),
                    t.shape()
                )));
            }
            *self.params.get_mut(id) = t;
        }
        Ok(self)
    }

    pub fn task_index(&self, name: &str) -> Result<usize, NetworkError> {
        self.config
            .task_index(name)
            .ok_or_else(|| NetworkError::UnknownTask(name.to_owned()))
    }

    pub fn encode<'a>(&self, surfaces: impl IntoIterator<Item = &'a str>) -> Encoded {
        let mut e = Encoded::default();
        for w in surfaces {
            e.words.push(self.vocab.word_index(w));
            if self.config.chars.is_some() {
                e.chars.push(self.vocab.char_indices(w));
            }
        }
        e
    }

    pub fn encode_sentence(&self, s: &Sentence) -> Encoded {
        self.encode(s.surfaces())
    }

    /// Gold label indices of `task` for one sentence.
    pub fn gold_indices<S: AsRef<str>>(&self, task: usize, labels: &[S]) -> Result<Vec<usize>, NetworkError> {
        let spec = &self.config.tasks[task];
        labels
            .iter()
            .map(|l| {
                spec.label_index(l.as_ref()).ok_or_else(|| NetworkError::UnknownLabel {
                    task: spec.name.clone(),
                    label: l.as_ref().to_owned(),
                })
            })
            .collect()
    }

    /// Best label indices for one sentence, without dropout.
    pub fn predict_indices(&self, enc: &Encoded, task: usize) -> Result<Vec<usize>, NetworkError> {
        if enc.is_empty() {
            return Ok(Vec::new());
        }
        let mut f = Forward::new(self, None);
        let logits = f.logits(enc, task)?;
        let scores = f.graph.value(logits);
        Ok(match self.layout.tasks[task].crf {
            None => (0..scores.rows()).map(|t| scores.argmax_row(t)).collect(),
            Some([tr, b, e]) => {
                CrfScores {
                    emissions: scores,
                    transitions: self.params.get(tr),
                    begin: self.params.get(b),
                    end: self.params.get(e),
                }
                .viterbi()
                .0
            }
        })
    }

    /// Batch loss and the gradient of every parameter bound in the pass.
    /// Dropout is active iff `rng` is given.
    pub fn loss_and_gradients(
        &self,
        batch: &[(&Encoded, &[usize])],
        task: usize,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(f64, Vec<(usize, Tensor)>), NetworkError> {
        let mut f = Forward::new(self, rng);
        let loss = f.batch_loss(batch, task)?;
        f.graph.backward(loss)?;
        let grads = f
            .bound_params()
            .into_iter()
            .filter_map(|(id, v)| f.graph.grad(v).map(|g| (id, g.clone())))
            .collect();
        Ok((f.graph.value(loss).item(), grads))
    }

    pub fn predict<'a>(&self, surfaces: impl IntoIterator<Item = &'a str>, task: usize) -> Result<Vec<String>, NetworkError> {
        let enc = self.encode(surfaces);
        let labels = &self.config.tasks[task].labels;
        Ok(self
            .predict_indices(&enc, task)?
            .into_iter()
            .map(|i| labels[i].clone())
            .collect())
    }

    /// Predictions for many sentences, computed in parallel and returned in
    /// input order.
    pub fn predict_all(&self, sentences: &[Sentence], task: usize) -> Result<Vec<Vec<String>>, NetworkError> {
        sentences
            .par_iter()
            .map(|s| self.predict(s.surfaces(), task))
            .collect()
    }
}

/// One forward computation over the model's parameters. With an RNG the
/// configured dropout is active; without one the pass is deterministic.
///
/// Dropout masks are drawn in computation order: word dropout, then per
/// shared layer and direction the input mask, the state masks and finally
/// the layer's output mask, then the task mask.
pub struct Forward<'m, 'r> {
    pub graph: Graph,
    model: &'m Tagger,
    rng: Option<&'r mut ChaCha8Rng>,
    frozen: HashMap<usize, Var>,
}

impl<'m, 'r> Forward<'m, 'r> {
    pub fn new(model: &'m Tagger, rng: Option<&'r mut ChaCha8Rng>) -> Self {
        Forward {
            graph: Graph::new(),
            model,
            rng,
            frozen: HashMap::new(),
        }
    }

    /// Graph node of parameter `id`; frozen parameters become constants.
    pub fn param(&mut self, id: usize) -> Var {
        let p = &self.model.params;
        if p.is_trainable(id) {
            return self.graph.param(ParamId(id), p.get(id));
        }
        if let Some(&v) = self.frozen.get(&id) {
            return v;
        }
        let v = self.graph.input(p.get(id).clone());
        self.frozen.insert(id, v);
        v
    }

    /// A `rows × cols` keep-mask, or `None` when dropout is inactive.
    /// With `per_row`, one draw decides each whole row; otherwise every
    /// entry is drawn. Kept entries are `1/(1−p)` if `rescale`, else 1.
    fn mask(&mut self, rows: usize, cols: usize, p: f64, per_row: bool, rescale: bool) -> Option<Tensor> {
        let rng = self.rng.as_deref_mut().filter(|_| p > 0.0)?;
        let keep = if rescale { 1.0 / (1.0 - p) } else { 1.0 };
        let mut m = Tensor::zeros(rows, cols);
        if per_row {
            for r in 0..rows {
                if rng.gen::<f64>() >= p {
                    m.row_slice_mut(r).fill(keep);
                }
            }
        } else {
            for x in m.data_mut() {
                if rng.gen::<f64>() >= p {
                    *x = keep;
                }
            }
        }
        Some(m)
    }

    /// Mask shared by all rows (variational) or drawn per entry.
    fn step_mask(&mut self, rows: usize, cols: usize, p: f64) -> Option<Tensor> {
        if self.model.config.dropout.variational {
            let row = self.mask(1, cols, p, false, true)?;
            let mut m = Tensor::zeros(rows, cols);
            for r in 0..rows {
                m.row_slice_mut(r).copy_from_slice(row.data());
            }
            Some(m)
        } else {
            self.mask(rows, cols, p, false, true)
        }
    }

    fn apply(&mut self, x: Var, mask: Option<Tensor>) -> Result<Var, NetworkError> {
        Ok(match mask {
            Some(m) => self.graph.mask(x, m)?,
            None => x,
        })
    }

    fn cell(&mut self, ids: &CellIds) -> CellVars {
        CellVars {
            kind: ids.kind,
            hidden: ids.hidden,
            vars: ids.ids.iter().map(|&i| self.param(i)).collect(),
        }
    }

    /// Word representations `T × d` (plus character features when
    /// enabled).
    pub fn embed(&mut self, enc: &Encoded) -> Result<Var, NetworkError> {
        let layout = &self.model.layout;
        let table = self.param(layout.words);
        let words = self.graph.gather(table, enc.words.clone())?;
        let d = self.graph.value(words).cols();
        let m = self.mask(enc.len(), d, self.model.config.dropout.word, true, false);
        let words = self.apply(words, m)?;
        let Some((emb, fwd, bwd)) = &layout.chars else {
            return Ok(words);
        };
        let (fwd, bwd) = (self.cell(fwd), self.cell(bwd));
        let emb = self.param(*emb);
        let mut feats = Vec::with_capacity(enc.len());
        for chars in &enc.chars {
            feats.push(self.char_features(emb, &fwd, &bwd, chars)?);
        }
        let feats = self.graph.stack(&feats)?;
        Ok(self.graph.concat(&[words, feats])?)
    }

    /// Final forward and final backward state of the character BiLSTM; a
    /// zero vector for an empty word.
    fn char_features(&mut self, emb: Var, fwd: &CellVars, bwd: &CellVars, chars: &[usize]) -> Result<Var, NetworkError> {
        let h = fwd.hidden;
        if chars.is_empty() {
            return Ok(self.graph.input(Tensor::zeros(1, 2 * h)));
        }
        let x = self.graph.gather(emb, chars.to_vec())?;
        let mut last = Vec::with_capacity(2);
        for (cell, reverse) in [(fwd, false), (bwd, true)] {
            let xp = project_inputs(&mut self.graph, cell, x)?;
            let mut s = CellState::zeros(&mut self.graph, CellKind::Lstm, h);
            let order: Vec<usize> = if reverse {
                (0..chars.len()).rev().collect()
            } else {
                (0..chars.len()).collect()
            };
            for t in order {
                let rows = xp
                    .iter()
                    .map(|&p| self.graph.row(p, t))
                    .collect::<Result<Vec<_>, _>>()?;
                s = step_projected(&mut self.graph, cell, &rows, s.h, s)?;
            }
            last.push(s.h);
        }
        Ok(self.graph.concat(&last)?)
    }

    /// Bidirectional recurrent layer: `T × k` to `T × 2h`.
    pub fn bidirectional(&mut self, x: Var, layer: usize) -> Result<Var, NetworkError> {
        let ids = self.model.layout.layers[layer].clone();
        let drop = self.model.config.dropout;
        let variational = drop.variational;
        let (t_len, k) = {
            let v = self.graph.value(x);
            (v.rows(), v.cols())
        };
        let mut halves = Vec::with_capacity(2);
        for (dir, ids) in ids.iter().enumerate() {
            let cell = self.cell(ids);
            let h = cell.hidden;
            let m = self.step_mask(t_len, k, drop.rnn_input);
            let xin = self.apply(x, m)?;
            let xp = project_inputs(&mut self.graph, &cell, xin)?;
            let shared_state_mask = if variational {
                self.mask(1, h, drop.rnn_state, false, true)
            } else {
                None
            };
            let mut s = CellState::zeros(&mut self.graph, cell.kind, h);
            let mut outs = vec![None; t_len];
            let order: Vec<usize> = if dir == 1 {
                (0..t_len).rev().collect()
            } else {
                (0..t_len).collect()
            };
            for t in order {
                let sm = match &shared_state_mask {
                    Some(m) => Some(m.clone()),
                    None if !variational => self.mask(1, h, drop.rnn_state, false, true),
                    None => None,
                };
                let h_in = self.apply(s.h, sm)?;
                let rows = xp
                    .iter()
                    .map(|&p| self.graph.row(p, t))
                    .collect::<Result<Vec<_>, _>>()?;
                s = step_projected(&mut self.graph, &cell, &rows, h_in, s)?;
                outs[t] = Some(s.h);
            }
            let outs: Vec<Var> = outs.into_iter().map(|o| o.expect("every step ran")).collect();
            halves.push(self.graph.stack(&outs)?);
        }
        let out = self.graph.concat(&halves)?;
        let w = self.graph.value(out).cols();
        let m = self.step_mask(t_len, w, drop.rnn_output);
        self.apply(out, m)
    }

    /// Outputs of shared layers `1..=upto`.
    pub fn shared(&mut self, embedded: Var, upto: usize) -> Result<Vec<Var>, NetworkError> {
        let mut outputs: Vec<Var> = Vec::with_capacity(upto);
        for l in 0..upto {
            let input = match outputs.last() {
                None => embedded,
                Some(&prev) if self.model.config.shortcuts => self.graph.concat(&[prev, embedded])?,
                Some(&prev) => prev,
            };
            outputs.push(self.bidirectional(input, l)?);
        }
        Ok(outputs)
    }

    /// Task scores from the output of its termination layer.
    pub fn head(&mut self, task: usize, input: Var) -> Result<Var, NetworkError> {
        let spec = &self.model.config.tasks[task];
        let ids = self.model.layout.tasks[task].clone();
        let mut x = input;
        for (layer, &w) in spec.private.iter().zip(&ids.private) {
            let w = self.param(w);
            let z = self.graph.matmul(x, w)?;
            x = match layer.activation {
                Activation::Sigmoid => self.graph.sigmoid(z)?,
                Activation::Tanh => self.graph.tanh(z)?,
                Activation::Relu => self.graph.relu(z)?,
                Activation::Identity => z,
            };
        }
        let w = self.param(ids.proj_w);
        let b = self.param(ids.proj_b);
        let z = self.graph.matmul(x, w)?;
        let logits = self.graph.add_row(z, b)?;
        let (rows, cols) = {
            let v = self.graph.value(logits);
            (v.rows(), v.cols())
        };
        let m = self.mask(rows, cols, spec.dropout, false, true);
        self.apply(logits, m)
    }

    pub fn logits(&mut self, enc: &Encoded, task: usize) -> Result<Var, NetworkError> {
        let layer = self.model.config.tasks[task].layer;
        let e = self.embed(enc)?;
        let outputs = self.shared(e, layer)?;
        self.head(task, outputs[layer - 1])
    }

    /// Negative log-likelihood of `gold` for one sentence: mean token loss
    /// for softmax heads, sequence loss for CRF heads.
    pub fn loss(&mut self, enc: &Encoded, task: usize, gold: &[usize]) -> Result<Var, NetworkError> {
        let logits = self.logits(enc, task)?;
        Ok(match self.model.layout.tasks[task].crf {
            None => self.graph.softmax_nll(logits, gold.to_vec())?,
            Some([tr, b, e]) => {
                let (tr, b, e) = (self.param(tr), self.param(b), self.param(e));
                self.graph.crf_nll(logits, tr, b, e, gold.to_vec())?
            }
        })
    }

    /// Mean of the per-sentence losses.
    pub fn batch_loss(&mut self, batch: &[(&Encoded, &[usize])], task: usize) -> Result<Var, NetworkError> {
        let mut total: Option<Var> = None;
        for (enc, gold) in batch {
            let l = self.loss(enc, task, gold)?;
            total = Some(match total {
                Some(t) => self.graph.add(t, l)?,
                None => l,
            });
        }
        let total = total.ok_or_else(|| NetworkError::Config("empty batch".into()))?;
        Ok(self.graph.scale(total, 1.0 / batch.len() as f64)?)
    }

    /// Parameter ids bound in this graph, with their nodes.
    pub fn bound_params(&self) -> Vec<(usize, Var)> {
        self.graph
            .param_vars()
            .into_iter()
            .map(|(id, v)| (id.0, v))
            .collect()
    }
}
