use serde::{Deserialize, Serialize};

use super::{MatchCounts, MetricsError, ResultList};
use crate::labels::{am_postprocess, components_from_labels, parse_am_sequence, rel_to_abs, AmAliases, AmLabel, AmType, ComponentSpan, LabelError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchLevel {
    /// At least half of the gold component's tokens are covered.
    Approximate,
    /// Identical token spans.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmTarget {
    Component,
    Relation,
}

/// Span matching only; type equality is checked by the caller.
pub fn am_match(gold: &ComponentSpan, pred: &ComponentSpan, level: MatchLevel) -> bool {
    match level {
        MatchLevel::Exact => gold.start == pred.start && gold.end == pred.end,
        MatchLevel::Approximate => {
            let lo = gold.start.max(pred.start);
            let hi = gold.end.min(pred.end);
            let shared = if lo <= hi { hi - lo + 1 } else { 0 };
            shared > 0 && 2 * shared >= gold.len()
        }
    }
}

/// Components of one document with absolute link targets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DocumentStructure {
    pub components: Vec<ComponentSpan>,
}

impl DocumentStructure {
    pub fn from_labels(labels: &[AmLabel]) -> Result<Self, LabelError> {
        Ok(DocumentStructure {
            components: rel_to_abs(&components_from_labels(labels)?)?,
        })
    }

    /// Parses label strings, optionally repairing them first.
    pub fn parse<S: AsRef<str>>(labels: &[S], aliases: &AmAliases, postprocess: bool) -> Result<Self, LabelError> {
        let mut seq = parse_am_sequence(labels, aliases)?;
        if postprocess {
            seq = am_postprocess(&seq);
        }
        Self::from_labels(&seq)
    }

    /// Indices of premises with a link, in document order.
    fn relations(&self) -> impl Iterator<Item = usize> + '_ {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == AmType::Premise && c.target.is_some())
            .map(|(i, _)| i)
    }
}

fn component_eq(g: &ComponentSpan, p: &ComponentSpan, level: MatchLevel) -> bool {
    g.kind == p.kind && am_match(g, p, level)
}

/// Greedy one-to-one matching: each gold item, in document order, takes the
/// first unmatched prediction it matches.
fn greedy(gold: &[usize], pred: &[usize], eq: impl Fn(usize, usize) -> bool) -> MatchCounts {
    let mut used = vec![false; pred.len()];
    let mut tp = 0;
    for &j in gold {
        if let Some(k) = (0..pred.len()).find(|&k| !used[k] && eq(j, pred[k])) {
            used[k] = true;
            tp += 1;
        }
    }
    MatchCounts {
        tp,
        fp: pred.len() - tp,
        fn_: gold.len() - tp,
    }
}

pub fn am_counts(gold: &DocumentStructure, pred: &DocumentStructure, target: AmTarget, level: MatchLevel) -> MatchCounts {
    let (g, p) = (&gold.components, &pred.components);
    match target {
        AmTarget::Component => {
            let gi: Vec<usize> = (0..g.len()).collect();
            let pi: Vec<usize> = (0..p.len()).collect();
            greedy(&gi, &pi, |j, i| component_eq(&g[j], &p[i], level))
        }
        AmTarget::Relation => {
            let gi: Vec<usize> = gold.relations().collect();
            let pi: Vec<usize> = pred.relations().collect();
            greedy(&gi, &pi, |j, i| {
                let (gs, ps) = (&g[j], &p[i]);
                let (gt, pt) = (&g[gs.target.expect("relation")], &p[ps.target.expect("relation")]);
                gs.stance == ps.stance && component_eq(gs, ps, level) && component_eq(gt, pt, level)
            })
        }
    }
}

/// Component or relation F1 over all documents of `results`, summing counts
/// before computing the score.
pub fn am_f1(
    results: &ResultList,
    target: AmTarget,
    level: MatchLevel,
    aliases: &AmAliases,
    postprocess: bool,
) -> Result<f64, MetricsError> {
    results.check()?;
    let mut total = MatchCounts::default();
    for (document, (gold, pred)) in results.document_labels().into_iter().enumerate() {
        let err = |source| MetricsError::Structure { document, source };
        let g = DocumentStructure::parse(&gold, aliases, false).map_err(err)?;
        let p = DocumentStructure::parse(&pred, aliases, postprocess).map_err(err)?;
        total += am_counts(&g, &p, target, level);
    }
    Ok(total.f1())
}
