use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{aggregate, am_f1, edit_distance, token_prf, word_accuracy, Aggregate, AmTarget, MatchLevel, MetricsError, ResultList};
use crate::labels::{correct_bio_strings, strip_alignment_symbols, AmAliases, Repair, EMPTY_SYMBOL, JOIN_SYMBOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MetricKind {
    Accuracy,
    Precision,
    Recall,
    F1,
    ComponentF1Approx,
    ComponentF1Exact,
    RelationF1Approx,
    RelationF1Exact,
    WordAccuracy,
    EditDistanceMean,
    EditDistanceMedian,
}

impl MetricKind {
    pub const ALL: [MetricKind; 11] = [
        MetricKind::Accuracy,
        MetricKind::Precision,
        MetricKind::Recall,
        MetricKind::F1,
        MetricKind::ComponentF1Approx,
        MetricKind::ComponentF1Exact,
        MetricKind::RelationF1Approx,
        MetricKind::RelationF1Exact,
        MetricKind::WordAccuracy,
        MetricKind::EditDistanceMean,
        MetricKind::EditDistanceMedian,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::Precision => "precision",
            MetricKind::Recall => "recall",
            MetricKind::F1 => "f1",
            MetricKind::ComponentF1Approx => "c_f1_50",
            MetricKind::ComponentF1Exact => "c_f1_100",
            MetricKind::RelationF1Approx => "r_f1_50",
            MetricKind::RelationF1Exact => "r_f1_100",
            MetricKind::WordAccuracy => "wacc",
            MetricKind::EditDistanceMean => "edit_distance_mean",
            MetricKind::EditDistanceMedian => "edit_distance_median",
        }
    }

    /// Whether larger values are better.
    pub fn higher_is_better(self) -> bool {
        !matches!(self, MetricKind::EditDistanceMean | MetricKind::EditDistanceMedian)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = MetricKind::ALL.iter().map(|m| m.as_str()).collect();
                format!("unknown metric {s:?} (expected one of {})", names.join(", "))
            })
    }
}

impl TryFrom<String> for MetricKind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<MetricKind> for String {
    fn from(m: MetricKind) -> Self {
        m.as_str().to_owned()
    }
}

#[derive(Clone, Debug)]
pub struct MetricOptions {
    /// BIO repair of predictions before token metrics.
    pub bio_repair: Option<Repair>,
    /// Repair predicted AM structures before AM metrics.
    pub am_postprocess: bool,
    pub aliases: AmAliases,
    /// Labels that count in the macro average even when unobserved.
    pub inventory: Vec<String>,
    pub empty_symbol: String,
    pub join_symbol: String,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            bio_repair: None,
            am_postprocess: true,
            aliases: AmAliases::default(),
            inventory: Vec::new(),
            empty_symbol: EMPTY_SYMBOL.to_owned(),
            join_symbol: JOIN_SYMBOL.to_owned(),
        }
    }
}

fn repaired(results: &ResultList, repair: Option<Repair>) -> Result<Vec<String>, MetricsError> {
    let mut out = Vec::new();
    for (document, s) in results.sentences.iter().enumerate() {
        match repair {
            Some(r) => out.extend(
                correct_bio_strings(&s.pred, r).map_err(|source| MetricsError::Structure { document, source })?,
            ),
            None => out.extend(s.pred.iter().cloned()),
        }
    }
    Ok(out)
}

/// Computes every requested metric, in request order.
pub fn evaluate(results: &ResultList, metrics: &[MetricKind], opts: &MetricOptions) -> Result<Vec<(MetricKind, f64)>, MetricsError> {
    results.check()?;
    let mut token = None;
    let mut words = None;
    let mut out = Vec::with_capacity(metrics.len());
    for &m in metrics {
        let v = match m {
            MetricKind::Accuracy | MetricKind::Precision | MetricKind::Recall | MetricKind::F1 => {
                if token.is_none() {
                    let pred = repaired(results, opts.bio_repair)?;
                    token = Some(token_prf(&results.gold_labels(), &pred, &opts.inventory)?);
                }
                let t = token.expect("computed above");
                match m {
                    MetricKind::Accuracy => t.accuracy,
                    MetricKind::Precision => t.precision,
                    MetricKind::Recall => t.recall,
                    _ => t.f1,
                }
            }
            MetricKind::ComponentF1Approx => am(results, opts, AmTarget::Component, MatchLevel::Approximate)?,
            MetricKind::ComponentF1Exact => am(results, opts, AmTarget::Component, MatchLevel::Exact)?,
            MetricKind::RelationF1Approx => am(results, opts, AmTarget::Relation, MatchLevel::Approximate)?,
            MetricKind::RelationF1Exact => am(results, opts, AmTarget::Relation, MatchLevel::Exact)?,
            MetricKind::WordAccuracy | MetricKind::EditDistanceMean | MetricKind::EditDistanceMedian => {
                let (pred, gold) = words.get_or_insert_with(|| {
                    let strip = |l: &[String]| strip_alignment_symbols(l, &opts.empty_symbol, &opts.join_symbol);
                    let pred: Vec<String> = results.sentences.iter().map(|s| strip(&s.pred)).collect();
                    let gold: Vec<String> = results.sentences.iter().map(|s| strip(&s.gold)).collect();
                    (pred, gold)
                });
                match m {
                    MetricKind::WordAccuracy => word_accuracy(pred, gold)?,
                    _ => {
                        let d: Vec<f64> = pred
                            .iter()
                            .zip(gold.iter())
                            .map(|(p, g)| {
                                let p: Vec<&str> = p.split_whitespace().collect();
                                let g: Vec<&str> = g.split_whitespace().collect();
                                edit_distance(&p, &g) as f64
                            })
                            .collect();
                        let how = if m == MetricKind::EditDistanceMean {
                            Aggregate::Mean
                        } else {
                            Aggregate::Median
                        };
                        aggregate(&d, how)?
                    }
                }
            }
        };
        out.push((m, v));
    }
    Ok(out)
}

fn am(results: &ResultList, opts: &MetricOptions, target: AmTarget, level: MatchLevel) -> Result<f64, MetricsError> {
    am_f1(results, target, level, &opts.aliases, opts.am_postprocess)
}
