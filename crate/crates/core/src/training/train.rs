use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    clip_global_norm, save_model, DevScorer, EarlyStopping, EarlyStoppingConfig, Example, GradientSet, Optimizer,
    OptimizerConfig, TaskData, TrainError,
};
use crate::network::{NetworkConfig, NetworkError, Tagger};
use crate::numeric::NumericError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Maximum number of epochs.
    pub epochs: usize,
    pub batch_size: usize,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Global-norm clip threshold.
    #[serde(default)]
    pub clip: Option<f64>,
    #[serde(default)]
    pub early_stopping: Option<EarlyStoppingConfig>,
    pub main_task: String,
    #[serde(default)]
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self, net: &NetworkConfig) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be at least 1".into());
        }
        if net.task_index(&self.main_task).is_none() {
            return bad(format!("main task {:?} is not declared", self.main_task));
        }
        if let Some(c) = self.clip {
            if !(c > 0.0) {
                return bad(format!("clip threshold must be positive, got {c}"));
            }
        }
        if let Some(es) = &self.early_stopping {
            if es.patience == 0 {
                return bad("early stopping patience must be at least 1".into());
            }
            if net.task_index(&es.task).is_none() {
                return bad(format!("early stopping task {:?} is not declared", es.task));
            }
        }
        self.optimizer.validate().map_err(TrainError::Config)
    }
}

/// One line of the training log.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean batch loss per task that had training data.
    pub losses: Vec<(String, f64)>,
    pub dev: Option<f64>,
    pub seconds: f64,
}

impl EpochLog {
    /// Tab-separated header matching [`EpochLog::to_tsv`].
    pub fn tsv_header(&self) -> String {
        let mut cols = vec!["epoch".to_owned()];
        cols.extend(self.losses.iter().map(|(t, _)| format!("loss:{t}")));
        cols.push("dev".into());
        cols.push("seconds".into());
        cols.join("\t")
    }

    pub fn to_tsv(&self) -> String {
        let mut cols = vec![self.epoch.to_string()];
        cols.extend(self.losses.iter().map(|(_, l)| l.to_string()));
        cols.push(self.dev.map_or_else(|| "NA".to_owned(), |d| d.to_string()));
        cols.push(format!("{:.3}", self.seconds));
        cols.join("\t")
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// The retained model: best on dev under early stopping, else the last.
    pub model: Tagger,
    pub log: Vec<EpochLog>,
    /// Epoch (1-based) of the retained model.
    pub best_epoch: usize,
}

/// Optional collaborators of a training run.
#[derive(Default)]
pub struct TrainHooks<'a> {
    pub scorer: Option<&'a mut dyn DevScorer>,
    /// Rewritten whenever the retained model changes.
    pub checkpoint: Option<PathBuf>,
    pub on_epoch: Option<&'a mut dyn FnMut(&EpochLog)>,
}

/// `(task, example indices)` in processing order.
type Schedule = Vec<(usize, Vec<usize>)>;

fn batches(task: usize, n: usize, batch_size: usize, rng: &mut ChaCha8Rng) -> Schedule {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.chunks(batch_size).map(|c| (task, c.to_vec())).collect()
}

/// Every task's batches over its own shuffled data, then the combined list
/// shuffled. With a single contributing task the combined shuffle is
/// skipped, so the schedule equals the single-task one.
fn multi_task_schedule(data: &[TaskData], batch_size: usize, rng: &mut ChaCha8Rng) -> Schedule {
    let mut all = Vec::new();
    let mut contributing = 0;
    for d in data.iter().filter(|d| !d.examples.is_empty()) {
        contributing += 1;
        all.extend(batches(d.task, d.examples.len(), batch_size, rng));
    }
    if contributing > 1 {
        all.shuffle(rng);
    }
    all
}

fn numeric_failure(e: &NetworkError) -> bool {
    matches!(
        e,
        NetworkError::Numeric(NumericError::NonFinite { .. } | NumericError::NonFiniteAdjoint(_))
    )
}

/// Multi-task training. `rng` drives shuffling and dropout; draws happen in
/// processing order (per epoch: all shuffles, then per batch its dropout
/// masks).
pub fn train(
    model: Tagger,
    data: &[TaskData],
    cfg: &TrainConfig,
    hooks: TrainHooks<'_>,
    rng: &mut ChaCha8Rng,
) -> Result<TrainOutcome, TrainError> {
    run(model, data, cfg, hooks, rng, &mut |data, rng| {
        multi_task_schedule(data, cfg.batch_size, rng)
    })
}

/// Plain training of one task over its shuffled batches.
pub fn train_single_task(
    model: Tagger,
    data: &TaskData,
    cfg: &TrainConfig,
    hooks: TrainHooks<'_>,
    rng: &mut ChaCha8Rng,
) -> Result<TrainOutcome, TrainError> {
    run(model, std::slice::from_ref(data), cfg, hooks, rng, &mut |data, rng| {
        batches(data[0].task, data[0].examples.len(), cfg.batch_size, rng)
    })
}

fn run(
    mut model: Tagger,
    data: &[TaskData],
    cfg: &TrainConfig,
    mut hooks: TrainHooks<'_>,
    rng: &mut ChaCha8Rng,
    schedule: &mut dyn FnMut(&[TaskData], &mut ChaCha8Rng) -> Schedule,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate(&model.config)?;
    if data.iter().all(|d| d.examples.is_empty()) {
        return Err(TrainError::Data("no training data".into()));
    }
    let mut stopper = match &cfg.early_stopping {
        Some(es) => {
            if hooks.scorer.is_none() {
                return Err(TrainError::Config("early stopping needs dev data".into()));
            }
            Some(EarlyStopping::new(es.patience, es.metric.higher_is_better()))
        }
        None => None,
    };
    let mut optimizer = Optimizer::new(cfg.optimizer);
    let mut best = model.clone();
    let mut best_epoch = 0;
    let mut log = Vec::new();

    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        let plan = schedule(data, rng);
        let mut sums = vec![(0.0, 0usize); model.config.tasks.len()];
        for (b, (task, idx)) in plan.iter().enumerate() {
            let td = data.iter().find(|d| d.task == *task).expect("scheduled task has data");
            let batch: Vec<(&_, &[usize])> = idx
                .iter()
                .map(|&i| {
                    let Example { input, gold } = &td.examples[i];
                    (input, gold.as_slice())
                })
                .collect();
            let non_finite = || TrainError::NonFinite {
                epoch,
                task: model.config.tasks[*task].name.clone(),
                batch: b,
            };
            let (loss, grads) = match model.loss_and_gradients(&batch, *task, Some(&mut *rng)) {
                Ok(r) => r,
                Err(e) if numeric_failure(&e) => return Err(non_finite()),
                Err(e) => return Err(e.into()),
            };
            let mut grads = GradientSet::new(grads);
            if !loss.is_finite() || !grads.is_finite() {
                return Err(non_finite());
            }
            if let Some(t) = cfg.clip {
                clip_global_norm(&mut grads, t);
            }
            optimizer.step(&mut model.params, &grads);
            sums[*task].0 += loss;
            sums[*task].1 += 1;
        }

        let dev = match hooks.scorer.as_deref_mut() {
            Some(s) => Some(s.score(&model)?),
            None => None,
        };
        let (improved, stop) = match (&mut stopper, dev) {
            (Some(es), Some(score)) => {
                let o = es.observe(score);
                (o.improved, o.stop)
            }
            _ => (true, false),
        };
        if improved {
            best = model.clone();
            best_epoch = epoch;
            if let Some(path) = &hooks.checkpoint {
                save_model(&best, path)?;
            }
        }
        let entry = EpochLog {
            epoch,
            losses: model
                .config
                .tasks
                .iter()
                .zip(&sums)
                .filter(|(_, (_, n))| *n > 0)
                .map(|(t, (s, n))| (t.name.clone(), s / *n as f64))
                .collect(),
            dev,
            seconds: start.elapsed().as_secs_f64(),
        };
        if let Some(f) = hooks.on_epoch.as_deref_mut() {
            f(&entry);
        }
        log.push(entry);
        if stop {
            break;
        }
    }
    Ok(TrainOutcome {
        model: best,
        log,
        best_epoch,
    })
}
