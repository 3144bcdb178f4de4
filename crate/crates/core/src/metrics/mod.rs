//! Evaluation metrics over gold and predicted label sequences.

mod am;
mod overlap;
mod report;
mod s2s;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use thiserror::Error;

use crate::corpus::document_ranges;
use crate::labels::LabelError;

pub use am::{am_counts, am_f1, am_match, AmTarget, DocumentStructure, MatchLevel};
pub use overlap::{overlap_length, span_overlap_profile, structure_spans, LabeledSpan};
pub use report::{evaluate, MetricKind, MetricOptions};
pub use s2s::{aggregate, edit_distance, word_accuracy, Aggregate};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("sequence {index}: gold has {gold} labels, prediction has {pred}")]
    LengthMismatch { index: usize, gold: usize, pred: usize },
    #[error("metric needs at least one item")]
    Empty,
    #[error("coefficient of variation needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("coefficient of variation is undefined for a zero mean")]
    ZeroMean,
    #[error("malformed span {start}..{end}: start must be below end")]
    MalformedSpan { start: usize, end: usize },
    #[error("document {document}: {source}")]
    Structure {
        document: usize,
        #[source]
        source: LabelError,
    },
}

/// Gold and predicted labels for every token, with document boundaries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResultList {
    pub sentences: Vec<ResultSentence>,
    pub doc_starts: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResultSentence {
    pub tokens: Vec<String>,
    pub gold: Vec<String>,
    pub pred: Vec<String>,
}

impl ResultList {
    pub fn check(&self) -> Result<(), MetricsError> {
        for (index, s) in self.sentences.iter().enumerate() {
            if s.gold.len() != s.pred.len() {
                return Err(MetricsError::LengthMismatch {
                    index,
                    gold: s.gold.len(),
                    pred: s.pred.len(),
                });
            }
        }
        Ok(())
    }

    pub fn documents(&self) -> Vec<Range<usize>> {
        document_ranges(self.sentences.len(), self.doc_starts.as_deref())
    }

    /// Gold and predicted labels of each document, sentences concatenated.
    pub fn document_labels(&self) -> Vec<(Vec<&str>, Vec<&str>)> {
        self.documents()
            .into_iter()
            .map(|r| {
                let sents = &self.sentences[r];
                (
                    sents.iter().flat_map(|s| s.gold.iter().map(String::as_str)).collect(),
                    sents.iter().flat_map(|s| s.pred.iter().map(String::as_str)).collect(),
                )
            })
            .collect()
    }

    pub fn gold_labels(&self) -> Vec<&str> {
        self.sentences
            .iter()
            .flat_map(|s| s.gold.iter().map(String::as_str))
            .collect()
    }

    pub fn pred_labels(&self) -> Vec<&str> {
        self.sentences
            .iter()
            .flat_map(|s| s.pred.iter().map(String::as_str))
            .collect()
    }
}

/// True positives, false positives and false negatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl MatchCounts {
    /// `2TP / (2TP + FP + FN)`, and 0 when all counts are zero.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

impl std::ops::AddAssign for MatchCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TokenScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Token accuracy and macro-averaged precision, recall and F1.
///
/// The macro mean runs over `inventory` together with every label seen in
/// gold or prediction; labels that never occur contribute zero.
pub fn token_prf<S: AsRef<str>, T: AsRef<str>>(
    gold: &[S],
    pred: &[T],
    inventory: &[String],
) -> Result<TokenScores, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            index: 0,
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut labels: BTreeSet<&str> = inventory.iter().map(String::as_str).collect();
    let mut counts: BTreeMap<&str, MatchCounts> = BTreeMap::new();
    let mut correct = 0;
    for (g, p) in gold.iter().zip(pred) {
        let (g, p) = (g.as_ref(), p.as_ref());
        labels.insert(g);
        labels.insert(p);
        if g == p {
            correct += 1;
            counts.entry(g).or_default().tp += 1;
        } else {
            counts.entry(p).or_default().fp += 1;
            counts.entry(g).or_default().fn_ += 1;
        }
    }
    let n = labels.len() as f64;
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for l in &labels {
        let c = counts.get(l).copied().unwrap_or_default();
        p += c.precision();
        r += c.recall();
        f += c.f1();
    }
    Ok(TokenScores {
        accuracy: correct as f64 / gold.len() as f64,
        precision: p / n,
        recall: r / n,
        f1: f / n,
    })
}

/// Population standard deviation over the mean.
pub fn coefficient_of_variation(samples: &[f64]) -> Result<f64, MetricsError> {
    if samples.len() < 2 {
        return Err(MetricsError::TooFewSamples(samples.len()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(MetricsError::ZeroMean);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt() / mean)
}
