//! CoNLL corpora, vocabularies, pre-trained embeddings and label statistics.

mod cache;
mod embeddings;
mod stats;
mod synthetic;
mod vocab;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{load_cached, CacheError, CACHE_FORMAT_VERSION, CACHE_MAGIC};
pub use embeddings::{
    build_embedding_set, parse_embeddings, prune_embeddings, read_embedding_files, EmbeddingSet,
};
pub use stats::{central_moment, kurtosis, LabelDistribution};
pub use synthetic::synthetic_bio_corpus;
pub use vocab::{Indexer, LabelSet, Vocabulary, PAD, UNK};

/// Marker line that opens a new document.
pub const DOC_START: &str = "-DOCSTART-";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: expected at least {expected} columns, found {found}")]
    MissingColumn {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{file}: line {line}: {message}")]
    EmbeddingFormat {
        file: String,
        line: usize,
        message: String,
    },
    #[error("empty intersection of embedding vocabularies ({first} and {second})")]
    EmptyIntersection { first: String, second: String },
    #[error("label distribution has no observations")]
    EmptyDistribution,
    #[error("kurtosis is undefined: the second central moment is zero")]
    UndefinedKurtosis,
    #[error("kurtosis needs at least two values, got {0}")]
    TooFewValues(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Which columns of a CoNLL file hold the token and the per-task labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub token: usize,
    /// Task name and zero-based column index.
    pub labels: Vec<(String, usize)>,
}

impl ColumnSpec {
    pub fn new(token: usize) -> Self {
        ColumnSpec {
            token,
            labels: Vec::new(),
        }
    }

    pub fn with_label(mut self, task: impl Into<String>, column: usize) -> Self {
        self.labels.push((task.into(), column));
        self
    }

    fn min_columns(&self) -> usize {
        self.labels
            .iter()
            .map(|(_, c)| *c)
            .chain(std::iter::once(self.token))
            .max()
            .unwrap_or(0)
            + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub labels: BTreeMap<String, String>,
}

impl Token {
    pub fn label(&self, task: &str) -> Option<&str> {
        self.labels.get(task).map(String::as_str)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    /// Labels of `task`, or `None` if any token lacks one.
    pub fn labels(&self, task: &str) -> Option<Vec<String>> {
        self.tokens
            .iter()
            .map(|t| t.labels.get(task).cloned())
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    /// Sentence indices that open a document, when the file carried
    /// explicit document markers. Without markers every sentence is its own
    /// document.
    pub doc_starts: Option<Vec<usize>>,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Corpus {
            sentences,
            doc_starts: None,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Ranges of sentence indices, one per document.
    pub fn documents(&self) -> Vec<Range<usize>> {
        document_ranges(self.sentences.len(), self.doc_starts.as_deref())
    }

    pub fn label_distribution(&self, task: &str) -> LabelDistribution {
        LabelDistribution::from_labels(
            self.sentences
                .iter()
                .flat_map(|s| s.tokens.iter())
                .filter_map(|t| t.label(task)),
        )
    }
}

pub(crate) fn document_ranges(n: usize, starts: Option<&[usize]>) -> Vec<Range<usize>> {
    match starts {
        None => (0..n).map(|i| i..i + 1).collect(),
        Some(starts) => {
            let mut bounds: Vec<usize> = starts.iter().copied().filter(|&s| s < n).collect();
            if bounds.first() != Some(&0) && n > 0 {
                bounds.insert(0, 0);
            }
            bounds.dedup();
            bounds
                .iter()
                .enumerate()
                .map(|(i, &s)| s..bounds.get(i + 1).copied().unwrap_or(n))
                .collect()
        }
    }
}

/// Column-split CoNLL content before any column is interpreted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawConll {
    /// Per sentence, per token: the whitespace-separated columns.
    pub sentences: Vec<Vec<Vec<String>>>,
    /// 1-based source line of each token.
    pub lines: Vec<Vec<usize>>,
    pub doc_starts: Option<Vec<usize>>,
}

impl RawConll {
    pub fn parse(text: &str) -> Self {
        let mut raw = RawConll::default();
        let mut current: Vec<Vec<String>> = Vec::new();
        let mut current_lines = Vec::new();
        let mut starts: Vec<usize> = Vec::new();
        let flush = |raw: &mut RawConll, cur: &mut Vec<Vec<String>>, lines: &mut Vec<usize>| {
            if !cur.is_empty() {
                raw.sentences.push(std::mem::take(cur));
                raw.lines.push(std::mem::take(lines));
            }
        };
        for (i, line) in text.lines().enumerate() {
            let cols: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
            if cols.is_empty() {
                flush(&mut raw, &mut current, &mut current_lines);
                continue;
            }
            if cols[0] == DOC_START {
                flush(&mut raw, &mut current, &mut current_lines);
                starts.push(raw.sentences.len());
                continue;
            }
            current.push(cols);
            current_lines.push(i + 1);
        }
        flush(&mut raw, &mut current, &mut current_lines);
        if !starts.is_empty() {
            starts.dedup();
            raw.doc_starts = Some(starts);
        }
        raw
    }
}

/// Parses CoNLL text. Blank-line runs of any length separate sentences.
pub fn parse_conll(text: &str, columns: &ColumnSpec) -> Result<Corpus, CorpusError> {
    let raw = RawConll::parse(text);
    let need = columns.min_columns();
    let mut sentences = Vec::with_capacity(raw.sentences.len());
    for (sent, lines) in raw.sentences.iter().zip(&raw.lines) {
        let mut tokens = Vec::with_capacity(sent.len());
        for (cols, &line) in sent.iter().zip(lines) {
            if cols.len() < need {
                return Err(CorpusError::MissingColumn {
                    line,
                    expected: need,
                    found: cols.len(),
                });
            }
            let labels = columns
                .labels
                .iter()
                .map(|(task, c)| (task.clone(), cols[*c].clone()))
                .collect();
            tokens.push(Token {
                surface: cols[columns.token].clone(),
                labels,
            });
        }
        sentences.push(Sentence { tokens });
    }
    Ok(Corpus {
        sentences,
        doc_starts: raw.doc_starts,
    })
}

pub fn read_conll(path: &std::path::Path, columns: &ColumnSpec) -> Result<Corpus, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_conll(&text, columns)
}

/// Renders a corpus in tab-separated CoNLL. Columns not named by `columns`
/// are written as `_`.
pub fn write_conll(corpus: &Corpus, columns: &ColumnSpec) -> String {
    let width = columns.min_columns();
    let mut out = String::new();
    let starts = corpus.doc_starts.as_deref().unwrap_or(&[]);
    for (i, sentence) in corpus.sentences.iter().enumerate() {
        if starts.contains(&i) {
            out.push_str(DOC_START);
            out.push_str("\n\n");
        }
        for token in &sentence.tokens {
            let mut cells = vec!["_"; width];
            cells[columns.token] = &token.surface;
            for (task, c) in &columns.labels {
                if let Some(l) = token.labels.get(task) {
                    cells[*c] = l;
                }
            }
            let _ = writeln!(out, "{}", cells.join("\t"));
        }
        out.push('\n');
    }
    // Markers past the last sentence open empty trailing documents.
    let trailing = starts.iter().filter(|&&s| s >= corpus.sentences.len()).count();
    for _ in 0..trailing {
        out.push_str(DOC_START);
        out.push_str("\n\n");
    }
    out
}
