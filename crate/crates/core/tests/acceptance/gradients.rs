use std::collections::BTreeMap;
use std::time::Instant;

use mtl_tagger::corpus::{Indexer, Vocabulary};
use mtl_tagger::network::{
    Activation, CellKind, CharConfig, DropoutConfig, HeadKind, NetworkConfig, PrivateLayer, Tagger, TaskSpec,
};
use mtl_tagger::numeric::Tensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::common::oracle::max_relative_error;
use crate::{ensure, Verdict};

const EPS: f64 = 1e-5;
const TOLERANCE: f64 = 1e-6;
const SEEDS: u64 = 10;

fn vocab() -> Vocabulary {
    let strings = |v: &[&str]| Indexer::from(v.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    Vocabulary {
        words: strings(&["<PAD>", "<UNK>", "the", "cat", "sat", "down"]),
        chars: strings(&["<PAD>", "<UNK>", "t", "h", "e", "c", "a", "s", "d"]),
        labels: BTreeMap::new(),
    }
}

fn config(cell: CellKind, chars: bool, shortcuts: bool, private: bool, head: HeadKind) -> NetworkConfig {
    let task = |name: &str, layer, labels: &[&str]| TaskSpec {
        name: name.into(),
        labels: labels.iter().map(|s| s.to_string()).collect(),
        layer,
        private: if private {
            vec![PrivateLayer {
                units: 3,
                activation: Activation::Tanh,
            }]
        } else {
            vec![]
        },
        head,
        dropout: 0.0,
    };
    NetworkConfig {
        cell,
        shared_layers: vec![2, 2],
        shortcuts,
        word_dim: 3,
        train_embeddings: true,
        chars: chars.then_some(CharConfig { dim: 2, hidden: 2 }),
        dropout: DropoutConfig::default(),
        tasks: vec![task("low", 1, &["A", "B"]), task("high", 2, &["X", "Y", "Z"])],
    }
}

/// Every trainable parameter redrawn from U(-0.5, 0.5) so that CRF tables
/// and biases are not left at zero.
fn randomized(cfg: NetworkConfig, seed: u64) -> Tagger {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Tagger::new(cfg, vocab(), None, &mut rng).expect("valid config");
    let ids: Vec<usize> = m.params.iter().map(|(id, _, _)| id).collect();
    for id in ids {
        if m.params.is_trainable(id) {
            let t = m.params.get_mut(id);
            *t = Tensor::uniform(t.rows(), t.cols(), 0.5, &mut rng);
        }
    }
    m
}

pub fn run() -> Verdict {
    let start = Instant::now();
    let golds: [[&[usize]; 2]; 2] = [[&[0, 1, 1], &[1, 0]], [&[2, 0, 1], &[1, 2]]];
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for cell in [CellKind::Simple, CellKind::Lstm, CellKind::Gru] {
        for chars in [false, true] {
            for shortcuts in [false, true] {
                for private in [false, true] {
                    for head in [HeadKind::Softmax, HeadKind::Crf] {
                        for seed in 0..SEEDS {
                            let m = randomized(config(cell, chars, shortcuts, private, head), seed);
                            // "Down" exercises the lowercase lookup, "dog" the unknown word.
                            let a = m.encode(["the", "cat", "sat"]);
                            let b = m.encode(["Down", "dog"]);
                            for (task, gold) in golds.iter().enumerate() {
                                let err = max_relative_error(&m, &[(&a, gold[0]), (&b, gold[1])], task, EPS);
                                checks += 1;
                                ensure(err <= TOLERANCE, || {
                                    format!(
                                        "{cell:?} chars={chars} shortcuts={shortcuts} private={private} \
                                         {head:?} seed={seed} task={task}: relative error {err:e}"
                                    )
                                })?;
                                worst = worst.max(err);
                            }
                        }
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1}s, limit 120s"))?;
    Ok(format!("{checks} checks, max relative error {worst:.2e}"))
}
