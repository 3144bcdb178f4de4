use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::TrainError;
use crate::corpus::Corpus;
use crate::network::{Encoded, Tagger};

/// One encoded training sentence with gold label indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub input: Encoded,
    pub gold: Vec<usize>,
}

/// Training sentences of one task.
#[derive(Clone, Debug)]
pub struct TaskData {
    pub task: usize,
    pub examples: Vec<Example>,
}

impl TaskData {
    /// Encodes `corpus` with the labels stored under the task's name.
    pub fn from_corpus(model: &Tagger, task: usize, corpus: &Corpus) -> Result<Self, TrainError> {
        let name = &model.config.tasks[task].name;
        let mut examples = Vec::with_capacity(corpus.len());
        for (i, s) in corpus.sentences.iter().enumerate() {
            let labels = s
                .labels(name)
                .ok_or_else(|| TrainError::Data(format!("sentence {i} lacks labels for task {name:?}")))?;
            examples.push(Example {
                input: model.encode_sentence(s),
                gold: model.gold_indices(task, &labels)?,
            });
        }
        Ok(TaskData { task, examples })
    }
}

/// The first `⌈fraction · N⌉` of the `N` documents after a shuffle.
pub fn subsample_documents(corpus: &Corpus, fraction: f64, rng: &mut ChaCha8Rng) -> Corpus {
    assert!(fraction > 0.0 && fraction <= 1.0, "fraction must lie in (0, 1]");
    let mut docs = corpus.documents();
    docs.shuffle(rng);
    let keep = ((fraction * docs.len() as f64).ceil() as usize).min(docs.len());
    let mut sentences = Vec::new();
    let mut starts = Vec::with_capacity(keep);
    for range in &docs[..keep] {
        starts.push(sentences.len());
        sentences.extend(corpus.sentences[range.clone()].iter().cloned());
    }
    Corpus {
        sentences,
        doc_starts: corpus.doc_starts.as_ref().map(|_| starts),
    }
}
