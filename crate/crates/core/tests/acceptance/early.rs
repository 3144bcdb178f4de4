use mtl_tagger::corpus::synthetic_bio_corpus;
use mtl_tagger::metrics::MetricKind;
use mtl_tagger::training::{
    train, EarlyStopping, EarlyStoppingConfig, ScriptedScorer, TaskData, TrainHooks, CHECKPOINT_FILE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::overfit::{model, train_config};
use crate::{ensure, Verdict};

/// `(epochs run, best epoch)`: the best is the first strict optimum, and
/// training ends once `patience` epochs have passed without a new one.
fn rule(scores: &[f64], patience: usize, higher: bool) -> (usize, usize) {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if i > 0 && if higher { s > scores[best] } else { s < scores[best] } {
            best = i;
        }
        if i - best >= patience {
            return (i + 1, best + 1);
        }
    }
    (scores.len(), best + 1)
}

struct Script {
    scores: &'static [f64],
    patience: usize,
    metric: MetricKind,
    /// Epochs run and best epoch, worked out by hand.
    expect: (usize, usize),
}

const SCRIPTS: [Script; 5] = [
    Script {
        scores: &[0.5, 0.6, 0.6, 0.6, 0.6, 0.9],
        patience: 3,
        metric: MetricKind::F1,
        expect: (5, 2),
    },
    Script {
        scores: &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
        patience: 2,
        metric: MetricKind::F1,
        expect: (6, 6),
    },
    Script {
        scores: &[0.9, 0.1, 0.2, 0.3, 0.95],
        patience: 3,
        metric: MetricKind::Accuracy,
        expect: (4, 1),
    },
    Script {
        scores: &[3.0, 2.0, 2.5, 1.0, 1.0, 1.0, 0.5],
        patience: 2,
        metric: MetricKind::EditDistanceMean,
        expect: (6, 4),
    },
    Script {
        scores: &[0.4, 0.3, 0.5, 0.2, 0.1, 0.6],
        patience: 1,
        metric: MetricKind::F1,
        expect: (2, 1),
    },
];

pub fn run() -> Verdict {
    let corpus = synthetic_bio_corpus(12, 3, "ner", 5);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;

    for (k, s) in SCRIPTS.iter().enumerate() {
        let higher = s.metric.higher_is_better();
        ensure(rule(s.scores, s.patience, higher) == s.expect, || format!("script {k}: rule oracle disagrees with hand count"))?;
        let (m, mut rng) = model(&["ner"], &corpus, 0.1, 1);
        let data = TaskData::from_corpus(&m, 0, &corpus).map_err(|e| e.to_string())?;
        let mut cfg = train_config(s.scores.len(), "ner");
        cfg.early_stopping = Some(EarlyStoppingConfig {
            task: "ner".into(),
            metric: s.metric,
            patience: s.patience,
        });
        let mut scorer = ScriptedScorer::new(s.scores.to_vec());
        let hooks = TrainHooks {
            scorer: Some(&mut scorer),
            ..Default::default()
        };
        let out = train(m.clone(), std::slice::from_ref(&data), &cfg, hooks, &mut rng).map_err(|e| e.to_string())?;
        let got = (out.log.len(), out.best_epoch);
        ensure(got == s.expect, || format!("script {k}: ran {} epochs with best {}, expected {:?}", got.0, got.1, s.expect))?;

        // The retained model is the one a plain run of `best` epochs ends with.
        let (_, mut rng) = model(&["ner"], &corpus, 0.1, 1);
        let mut plain = train_config(s.expect.1, "ner");
        plain.early_stopping = None;
        let reference = train(m, std::slice::from_ref(&data), &plain, TrainHooks::default(), &mut rng).map_err(|e| e.to_string())?;
        ensure(reference.model == out.model, || format!("script {k}: retained model is not the best epoch's"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..2000 {
        let len = rng.gen_range(1..=15);
        // Few distinct values so that plateaus and ties are common.
        let scores: Vec<f64> = (0..len).map(|_| rng.gen_range(0..4) as f64 / 4.0).collect();
        let patience = rng.gen_range(1..=5);
        let higher = rng.gen_bool(0.5);
        let mut es = EarlyStopping::new(patience, higher);
        let mut ran = len;
        for (i, &s) in scores.iter().enumerate() {
            if es.observe(s).stop {
                ran = i + 1;
                break;
            }
        }
        let best = es.best().map(|(e, _)| e).unwrap_or(0);
        let want = rule(&scores, patience, higher);
        ensure((ran, best) == want, || format!("fuzz case {case}: {scores:?} p={patience}: got {:?}, rule {want:?}", (ran, best)))?;
    }

    let data_model = model(&["ner"], &corpus, 0.2, 4);
    let data = TaskData::from_corpus(&data_model.0, 0, &corpus).map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let (m, mut rng) = model(&["ner"], &corpus, 0.2, 4);
        let hooks = TrainHooks {
            checkpoint: Some(dir.path().join(name).join(CHECKPOINT_FILE)),
            ..Default::default()
        };
        std::fs::create_dir_all(dir.path().join(name)).map_err(|e| e.to_string())?;
        let out = train(m, std::slice::from_ref(&data), &train_config(8, "ner"), hooks, &mut rng).map_err(|e| e.to_string())?;
        let bytes = std::fs::read(dir.path().join(name).join(CHECKPOINT_FILE)).map_err(|e| e.to_string())?;
        runs.push((out, bytes));
    }
    let (a, b) = (&runs[0], &runs[1]);
    let mut worst: f64 = 0.0;
    for (ea, eb) in a.0.log.iter().zip(&b.0.log) {
        for ((_, la), (_, lb)) in ea.losses.iter().zip(&eb.losses) {
            worst = worst.max((la - lb).abs());
        }
    }
    ensure(a.0.log.len() == b.0.log.len() && worst <= 1e-12, || format!("losses differ by {worst:e}"))?;
    ensure(a.1 == b.1, || "checkpoints differ".into())?;
    Ok(format!(
        "{} scripted sequences and 2000 fuzz cases stop per rule; repeated runs: max loss difference {worst:e}, identical {}-byte checkpoints",
        SCRIPTS.len(),
        a.1.len()
    ))
}
