use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{Corpus, EmbeddingSet};

/// Index of the padding entry in word and character maps.
pub const PAD: usize = 0;
/// Index of the unknown entry in word and character maps.
pub const UNK: usize = 1;

const PAD_SYMBOL: &str = "<PAD>";
const UNK_SYMBOL: &str = "<UNK>";

/// Dense bijection between strings and `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Indexer {
    items: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Indexer {
    fn from(items: Vec<String>) -> Self {
        let mut out = Indexer::default();
        for item in items {
            out.insert(&item);
        }
        out
    }
}

impl From<Indexer> for Vec<String> {
    fn from(ix: Indexer) -> Self {
        ix.items
    }
}

impl Indexer {
    /// Returns the index of `item`, adding it if absent.
    pub fn insert(&mut self, item: &str) -> usize {
        if let Some(&i) = self.index.get(item) {
            return i;
        }
        self.items.push(item.to_owned());
        self.index.insert(item.to_owned(), self.items.len() - 1);
        self.items.len() - 1
    }

    pub fn get(&self, item: &str) -> Option<usize> {
        self.index.get(item).copied()
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.items.get(index).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }
}

pub type LabelSet = Indexer;

/// Word, character and per-task label maps of a model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub words: Indexer,
    pub chars: Indexer,
    pub labels: BTreeMap<String, LabelSet>,
}

fn reserved() -> Indexer {
    Indexer::from(vec![PAD_SYMBOL.to_owned(), UNK_SYMBOL.to_owned()])
}

impl Vocabulary {
    /// Builds maps from training corpora. When `embeddings` is given, the
    /// word map is the embedding vocabulary (after the reserved entries);
    /// otherwise it holds every training word in order of first occurrence.
    pub fn build<'a>(
        corpora: impl IntoIterator<Item = (&'a str, &'a Corpus)>,
        embeddings: Option<&EmbeddingSet>,
    ) -> Self {
        let mut words = reserved();
        let mut chars = reserved();
        let mut labels: BTreeMap<String, LabelSet> = BTreeMap::new();
        if let Some(emb) = embeddings {
            for w in emb.words() {
                words.insert(w);
            }
        }
        for (task, corpus) in corpora {
            let set = labels.entry(task.to_owned()).or_default();
            for token in corpus.sentences.iter().flat_map(|s| &s.tokens) {
                if embeddings.is_none() {
                    words.insert(&token.surface);
                }
                for ch in token.surface.chars() {
                    chars.insert(ch.encode_utf8(&mut [0; 4]));
                }
                if let Some(l) = token.labels.get(task) {
                    set.insert(l);
                }
            }
        }
        Vocabulary {
            words,
            chars,
            labels,
        }
    }

    /// Exact match, then lowercase match, then [`UNK`].
    pub fn word_index(&self, word: &str) -> usize {
        self.words
            .get(word)
            .or_else(|| self.words.get(&word.to_lowercase()))
            .unwrap_or(UNK)
    }

    pub fn char_indices(&self, word: &str) -> Vec<usize> {
        word.chars()
            .map(|c| self.chars.get(c.encode_utf8(&mut [0; 4])).unwrap_or(UNK))
            .collect()
    }

    pub fn label_set(&self, task: &str) -> Option<&LabelSet> {
        self.labels.get(task)
    }
}
