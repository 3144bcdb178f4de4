use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use mtl_tagger::corpus::synthetic_bio_corpus;
use mtl_tagger::hyperopt::{mask_template, run_search, SearchConfig, SearchReport};
use mtl_tagger::run::{run_with_corpora, EmbeddingConfig, RunConfig, TaskCorpora};
use mtl_tagger::training::CHECKPOINT_FILE;

use crate::{ensure, Verdict};

/// This trial's runs read an embeddings file full of NaN.
const FAILING: usize = 3;

const TEMPLATE: &str = "\
tasks:
  - name: ner
    train: train.conll
    dev: dev.conll
    label_column: 1
    head: ${head}
network:
  cell: ${cell}
  shared_layers: [${hidden}]
  word_dim: 6
regularization:
  dropout: {rnn_output: ${dropout}}
  clip: 5
training:
  epochs: 4
  batch_size: 4
  main_task: ner
  optimizer: {kind: adam, lr: ${lr}}
evaluation:
  metrics: [f1]
search:
  trials: 10
  seeds: 3
  master_seed: 17
  parallel_trials: true
  space:
    hidden: {discrete: [4, 12]}
    lr: {continuous: [0.005, 0.05]}
    dropout: {continuous: [0.0, 0.3]}
    cell: {list: [lstm, gru, simple]}
    head: {list: [softmax, crf]}
";

/// Corpora are handed to the runner directly; only the embeddings file of
/// the failing trial is read from disk.
fn workspace(dir: &Path) -> Result<Vec<TaskCorpora>, String> {
    let train = synthetic_bio_corpus(30, 5, "ner", 21);
    let dev = synthetic_bio_corpus(10, 5, "ner", 22);
    let words: std::collections::BTreeSet<String> = train
        .sentences
        .iter()
        .chain(&dev.sentences)
        .flat_map(|s| s.surfaces().map(str::to_owned).collect::<Vec<_>>())
        .collect();
    let emb: String = words.iter().map(|w| format!("{w} NaN 0.1 0.2\n")).collect();
    std::fs::write(dir.join("nan.txt"), emb).map_err(|e| e.to_string())?;
    Ok(vec![TaskCorpora {
        train,
        dev: Some(dev),
        test: None,
    }])
}

fn search(base: &Path, corpora: &[TaskCorpora], out: &Path, calls: &AtomicUsize) -> Result<SearchReport, String> {
    let masked: serde_yaml::Value = serde_yaml::from_str(&mask_template(TEMPLATE)).map_err(|e| e.to_string())?;
    let cfg: SearchConfig = serde_yaml::from_value(masked["search"].clone()).map_err(|e| e.to_string())?;
    run_search(TEMPLATE, &cfg, true, Some(out), |req| {
        calls.fetch_add(1, Ordering::SeqCst);
        let mut run = RunConfig::from_yaml(req.config, &[]).map_err(|e| e.to_string())?;
        run.training.seed = req.seed;
        if req.trial == FAILING {
            run.embeddings = Some(EmbeddingConfig {
                files: vec!["nan.txt".into()],
                prune: false,
                train: true,
            });
        }
        let outcome = run_with_corpora(&run, base, corpora, req.dir.as_deref()).map_err(|e| e.to_string())?;
        outcome.dev_score.ok_or_else(|| "no dev score".to_owned())
    })
    .map_err(|e| e.to_string())
}

pub fn run() -> Verdict {
    let start = Instant::now();
    let ws = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpora = workspace(ws.path())?;

    let calls = AtomicUsize::new(0);
    let first = search(ws.path(), &corpora, &ws.path().join("first"), &calls)?;
    let n = calls.load(Ordering::SeqCst);
    ensure(n == 30 && first.runs == 30, || format!("{n} runner calls, report counts {}", first.runs))?;
    ensure(first.trials.len() == 10, || format!("{} trials", first.trials.len()))?;

    let failing = &first.trials[FAILING];
    ensure(failing.failed() && failing.results.len() == 3, || "the injected failure was not recorded".into())?;
    let msg = failing.error().unwrap_or_default().to_owned();
    ensure(msg.contains("non-finite"), || format!("trial {FAILING} failed with {msg:?}"))?;
    ensure(first.ranking.len() == 9 && !first.ranking.contains(&FAILING), || format!("ranking {:?}", first.ranking))?;

    for t in first.trials.iter().filter(|t| t.index != FAILING) {
        let scores: Vec<f64> = t.results.iter().map(|r| r.clone()).collect::<Result<_, _>>()?;
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let got = t.mean.ok_or_else(|| format!("trial {} has no mean", t.index))?;
        ensure((got - mean).abs() <= 1e-12, || format!("trial {}: mean {got} vs {mean}", t.index))?;
    }
    for pair in first.ranking.windows(2) {
        let (a, b) = (&first.trials[pair[0]], &first.trials[pair[1]]);
        let (ma, mb) = (a.mean.unwrap(), b.mean.unwrap());
        ensure(ma > mb || (ma == mb && a.index < b.index), || format!("trial {} ranked above {}", a.index, b.index))?;
    }

    let second = search(ws.path(), &corpora, &ws.path().join("second"), &calls)?;
    ensure(second == first, || "the repeated search reported differently".into())?;
    let mut compared = 0;
    for t in 0..10 {
        for s in 0..3 {
            let rel = format!("trial_{t:03}/seed_{s}/{CHECKPOINT_FILE}");
            let (a, b) = (ws.path().join("first").join(&rel), ws.path().join("second").join(&rel));
            if t == FAILING {
                ensure(a.exists() == b.exists(), || format!("{rel} exists in one search only"))?;
                continue;
            }
            let (a, b) = (std::fs::read(&a).map_err(|e| format!("{rel}: {e}"))?, std::fs::read(&b).map_err(|e| format!("{rel}: {e}"))?);
            ensure(a == b, || format!("{rel} differs between searches"))?;
            compared += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 900.0, || format!("took {secs:.0}s"))?;
    let winner = first.winner().ok_or("no winner")?;
    Ok(format!(
        "30 runs, trial {FAILING} failed and was excluded, 9 ranked (best trial {} mean {:.4}); rerun identical ({compared} checkpoints)",
        winner.index,
        winner.mean.unwrap()
    ))
}
