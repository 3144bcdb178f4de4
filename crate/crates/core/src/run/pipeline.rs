use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{RunConfig, RunError};
use crate::corpus::{load_cached, prune_embeddings, read_conll, read_embedding_files, ColumnSpec, Corpus, Vocabulary};
use crate::hyperopt::{mask_template, plan_trials, run_search, HyperoptError, SearchConfig, SearchReport};
use crate::metrics::{evaluate, MetricKind, MetricOptions};
use crate::network::{NetworkConfig, Tagger, TaskSpec};
use crate::training::{
    result_list, subsample_documents, train, EpochLog, MetricScorer, TaskData, TrainConfig, TrainHooks,
    CHECKPOINT_FILE,
};

/// Training, dev and test corpora of one task.
#[derive(Clone, Debug)]
pub struct TaskCorpora {
    pub train: Corpus,
    pub dev: Option<Corpus>,
    pub test: Option<Corpus>,
}

/// One metric value of the final report.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRow {
    pub task: String,
    pub split: &'static str,
    pub metric: MetricKind,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub model: Tagger,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
    pub scores: Vec<ScoreRow>,
    /// First evaluation metric of the main task on its dev set.
    pub dev_score: Option<f64>,
}

pub fn scores_tsv(rows: &[ScoreRow]) -> String {
    let mut out = String::from("task\tsplit\tmetric\tvalue\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", r.task, r.split, r.metric, r.value);
    }
    out
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_owned()
    } else {
        base.join(p)
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Reads every corpus named by `cfg`, relative paths taken from `base`.
pub fn load_corpora(cfg: &RunConfig, base: &Path) -> Result<Vec<TaskCorpora>, RunError> {
    let cache = cfg.training.cache_dir.as_ref().map(|d| resolve(base, d));
    let read = |p: &Path, cols: &ColumnSpec| -> Result<Corpus, RunError> {
        let path = resolve(base, p);
        match &cache {
            Some(dir) => Ok(load_cached(&path, cols, dir)?.0),
            None => Ok(read_conll(&path, cols)?),
        }
    };
    cfg.tasks
        .iter()
        .map(|t| {
            let cols = ColumnSpec::new(t.token_column).with_label(&t.name, t.label_column);
            Ok(TaskCorpora {
                train: read(&t.train, &cols)?,
                dev: t.dev.as_deref().map(|p| read(p, &cols)).transpose()?,
                test: t.test.as_deref().map(|p| read(p, &cols)).transpose()?,
            })
        })
        .collect()
}

pub fn metric_options(cfg: &RunConfig, inventory: &[String]) -> MetricOptions {
    MetricOptions {
        bio_repair: cfg.evaluation.bio_repair,
        am_postprocess: cfg.evaluation.am_postprocess,
        inventory: inventory.to_vec(),
        empty_symbol: cfg.evaluation.empty_symbol.clone(),
        join_symbol: cfg.evaluation.join_symbol.clone(),
        ..Default::default()
    }
}

fn network_config(cfg: &RunConfig, vocab: &Vocabulary, word_dim: usize) -> NetworkConfig {
    NetworkConfig {
        cell: cfg.network.cell,
        shared_layers: cfg.network.shared_layers.clone(),
        shortcuts: cfg.network.shortcuts,
        word_dim,
        train_embeddings: cfg.embeddings.as_ref().is_none_or(|e| e.train),
        chars: cfg.network.chars,
        dropout: cfg.regularization.dropout,
        tasks: cfg
            .tasks
            .iter()
            .map(|t| TaskSpec {
                name: t.name.clone(),
                labels: vocab.label_set(&t.name).map(|l| l.items().to_vec()).unwrap_or_default(),
                layer: t.layer,
                private: t.private.clone(),
                head: t.head,
                dropout: cfg.regularization.task_dropout.get(&t.name).copied().unwrap_or(0.0),
            })
            .collect(),
    }
}

/// Builds, trains and evaluates a model on already loaded corpora.
///
/// One generator seeded with `training.seed` is drawn from in this order:
/// weight init, training-fraction subsampling, then the training loop.
/// With `out_dir`, the effective config, the epoch log, the checkpoint and
/// the score table are written there.
pub fn run_with_corpora(
    cfg: &RunConfig,
    base: &Path,
    corpora: &[TaskCorpora],
    out_dir: Option<&Path>,
) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let embeddings = match &cfg.embeddings {
        Some(e) => {
            let paths: Vec<PathBuf> = e.files.iter().map(|p| resolve(base, p)).collect();
            let set = read_embedding_files(&paths)?;
            Some(if e.prune {
                let all: Vec<&Corpus> = corpora
                    .iter()
                    .flat_map(|c| std::iter::once(&c.train).chain(c.dev.as_ref()).chain(c.test.as_ref()))
                    .collect();
                prune_embeddings(&set, &all)
            } else {
                set
            })
        }
        None => None,
    };
    let vocab = Vocabulary::build(
        cfg.tasks.iter().zip(corpora).map(|(t, c)| (t.name.as_str(), &c.train)),
        embeddings.as_ref(),
    );
    let word_dim = embeddings.as_ref().map_or(cfg.network.word_dim.unwrap_or(0), |e| e.dim());
    let net = network_config(cfg, &vocab, word_dim);
    for t in &net.tasks {
        if t.labels.is_empty() {
            return Err(RunError::Data(format!("task {:?} has no labelled training tokens", t.name)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.training.seed);
    let model = Tagger::new(net, vocab, embeddings.as_ref(), &mut rng)?;

    let mut data = Vec::with_capacity(cfg.tasks.len());
    for (i, (t, c)) in cfg.tasks.iter().zip(corpora).enumerate() {
        let train_corpus = if t.train_fraction < 1.0 {
            subsample_documents(&c.train, t.train_fraction, &mut rng)
        } else {
            c.train.clone()
        };
        data.push(TaskData::from_corpus(&model, i, &train_corpus)?);
    }

    let train_cfg = TrainConfig {
        epochs: cfg.training.epochs,
        batch_size: cfg.training.batch_size,
        optimizer: cfg.training.optimizer,
        clip: cfg.regularization.clip,
        early_stopping: cfg.training.early_stopping.clone(),
        main_task: cfg.training.main_task.clone(),
        seed: cfg.training.seed,
    };
    let (score_task, score_metric) = match &cfg.training.early_stopping {
        Some(es) => (es.task.clone(), es.metric),
        None => (cfg.training.main_task.clone(), cfg.evaluation.metrics[0]),
    };
    let score_index = model.task_index(&score_task)?;
    let mut scorer = corpora[score_index].dev.clone().map(|dev| MetricScorer {
        task: score_index,
        corpus: dev,
        metric: score_metric,
        options: metric_options(cfg, &model.config.tasks[score_index].labels),
    });

    let mut log_file = None;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let path = dir.join("config.yaml");
        let text = serde_yaml::to_string(cfg).expect("configs serialise");
        std::fs::write(&path, text).map_err(io(&path))?;
        let path = dir.join("train.log");
        log_file = Some((std::fs::File::create(&path).map_err(io(&path))?, path));
    }
    let mut log_error = None;
    let mut on_epoch = |e: &EpochLog| {
        if let Some((f, path)) = &mut log_file {
            let line = if e.epoch == 1 {
                format!("{}\n{}\n", e.tsv_header(), e.to_tsv())
            } else {
                format!("{}\n", e.to_tsv())
            };
            if let Err(err) = f.write_all(line.as_bytes()) {
                log_error.get_or_insert((path.clone(), err));
            }
        }
    };
    let hooks = TrainHooks {
        scorer: scorer.as_mut().map(|s| s as _),
        checkpoint: out_dir.map(|d| d.join(CHECKPOINT_FILE)),
        on_epoch: Some(&mut on_epoch),
    };
    let outcome = train(model, &data, &train_cfg, hooks, &mut rng)?;
    if let Some((path, source)) = log_error {
        return Err(RunError::Io { path, source });
    }

    let mut scores = Vec::new();
    for (i, (t, c)) in cfg.tasks.iter().zip(corpora).enumerate() {
        let opts = metric_options(cfg, &outcome.model.config.tasks[i].labels);
        for (split, corpus) in [("dev", &c.dev), ("test", &c.test)] {
            let Some(corpus) = corpus else { continue };
            let results = result_list(&outcome.model, i, corpus)?;
            for (metric, value) in evaluate(&results, &cfg.evaluation.metrics, &opts)? {
                scores.push(ScoreRow {
                    task: t.name.clone(),
                    split,
                    metric,
                    value,
                });
            }
        }
    }
    let dev_score = scores
        .iter()
        .find(|r| r.task == cfg.training.main_task && r.split == "dev")
        .map(|r| r.value);
    if let Some(dir) = out_dir {
        let path = dir.join("scores.tsv");
        std::fs::write(&path, scores_tsv(&scores)).map_err(io(&path))?;
    }
    Ok(RunOutcome {
        model: outcome.model,
        log: outcome.log,
        best_epoch: outcome.best_epoch,
        scores,
        dev_score,
    })
}

/// Loads the corpora of `cfg` and runs it.
pub fn run_experiment(cfg: &RunConfig, base: &Path, out_dir: Option<&Path>) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let corpora = load_corpora(cfg, base)?;
    run_with_corpora(cfg, base, &corpora, out_dir)
}

/// Random search driven by a templated run configuration whose `search`
/// section declares the space. Every trial config is rendered and validated
/// before the first training run.
pub fn run_search_experiment(
    template: &str,
    base: &Path,
    overrides: &[String],
    results_dir: Option<&Path>,
) -> Result<SearchReport, RunError> {
    let masked: serde_yaml::Value =
        serde_yaml::from_str(&mask_template(template)).map_err(|e| RunError::Config(e.to_string()))?;
    let section = masked
        .get("search")
        .cloned()
        .ok_or_else(|| RunError::Config("the configuration has no search section".into()))?;
    let search: SearchConfig = super::from_value(section).map_err(|e| match e {
        RunError::Config(m) => RunError::Config(format!("search: {m}")),
        other => other,
    })?;
    let first_metric = masked
        .get("evaluation")
        .and_then(|e| e.get("metrics"))
        .and_then(|m| m.get(0))
        .and_then(|m| m.as_str())
        .map(|m| m.parse::<MetricKind>())
        .transpose()
        .map_err(RunError::Config)?
        .unwrap_or(MetricKind::F1);

    let parse = |text: &str| RunConfig::from_yaml(text, overrides);
    let hyper = |e: HyperoptError| match e {
        HyperoptError::Io { path, source } => RunError::Io { path, source },
        other => RunError::Config(other.to_string()),
    };
    for t in plan_trials(template, &search).map_err(hyper)? {
        parse(&t.rendered).map_err(|e| RunError::Config(format!("trial {}: {e}", t.index)))?;
    }

    run_search(template, &search, first_metric.higher_is_better(), results_dir, |req| {
        let mut cfg = parse(req.config).map_err(|e| e.to_string())?;
        cfg.training.seed = req.seed;
        let out = run_experiment(&cfg, base, req.dir.as_deref()).map_err(|e| e.to_string())?;
        out.dev_score
            .ok_or_else(|| format!("main task {:?} has no dev file to score", cfg.training.main_task))
    })
    .map_err(hyper)
}
