use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Corpus, Sentence, Token};

const FILLER: [&str; 16] = [
    "the", "a", "of", "and", "to", "in", "was", "is", "with", "for", "on", "by", "at", "from", "that", "it",
];
const NAMES: [&str; 12] = [
    "Avila", "Bremen", "Cortez", "Dalton", "Eriksen", "Fuchs", "Garza", "Hollis", "Ibarra", "Jansen", "Kovacs",
    "Lindqvist",
];

/// A small tagging corpus with labels `B-ENT`, `I-ENT` and `O` under
/// `task`: entity spans of one to three name tokens among filler words.
/// A new document starts every `per_doc` sentences.
pub fn synthetic_bio_corpus(sentences: usize, per_doc: usize, task: &str, seed: u64) -> Corpus {
    assert!(per_doc > 0, "documents need at least one sentence");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let target = rng.gen_range(5..=12);
        let mut tokens = Vec::new();
        while tokens.len() < target {
            if rng.gen_bool(0.3) {
                let span = rng.gen_range(1..=3);
                for k in 0..span {
                    let label = if k == 0 { "B-ENT" } else { "I-ENT" };
                    tokens.push((NAMES[rng.gen_range(0..NAMES.len())], label));
                }
                // Keep adjacent spans apart so every B is recoverable.
                tokens.push((FILLER[rng.gen_range(0..FILLER.len())], "O"));
            } else {
                tokens.push((FILLER[rng.gen_range(0..FILLER.len())], "O"));
            }
        }
        out.push(Sentence {
            tokens: tokens
                .into_iter()
                .map(|(w, l)| Token {
                    surface: w.to_owned(),
                    labels: [(task.to_owned(), l.to_owned())].into_iter().collect(),
                })
                .collect(),
        });
    }
    let doc_starts = (0..sentences).step_by(per_doc).collect();
    Corpus {
        sentences: out,
        doc_starts: Some(doc_starts),
    }
}
