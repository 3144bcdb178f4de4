use super::am::DocumentStructure;
use super::MetricsError;

/// A component as a half-open token range `[start, end)` with its
/// component-level label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl LabeledSpan {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        LabeledSpan {
            start,
            end,
            label: label.into(),
        }
    }

    fn check(&self) -> Result<(), MetricsError> {
        if self.start >= self.end {
            return Err(MetricsError::MalformedSpan {
                start: self.start,
                end: self.end,
            });
        }
        Ok(())
    }
}

/// Overlap length of gold `[a, b)` and predicted `[c, d)` by the five
/// overlap conditions; 0 when they do not overlap.
pub fn overlap_length(a: usize, b: usize, c: usize, d: usize) -> usize {
    if a == c && b == d {
        b - a
    } else if a >= c && b >= d && a <= d {
        d - a
    } else if a <= c && b <= d && b >= c {
        b - c
    } else if a > c && b < d {
        b - a
    } else if a < c && b > d {
        d - c
    } else {
        0
    }
}

/// One `(component length, longest same-label overlap)` pair per gold span.
pub fn span_overlap_profile(gold: &[LabeledSpan], pred: &[LabeledSpan]) -> Result<Vec<(usize, usize)>, MetricsError> {
    for s in gold.iter().chain(pred) {
        s.check()?;
    }
    Ok(gold
        .iter()
        .map(|g| {
            let best = pred
                .iter()
                .filter(|p| p.label == g.label)
                .map(|p| overlap_length(g.start, g.end, p.start, p.end))
                .max()
                .unwrap_or(0);
            (g.end - g.start, best)
        })
        .collect())
}

/// Half-open spans of a document's components, labelled by type, stance and
/// absolute target.
pub fn structure_spans(doc: &DocumentStructure, offset: usize) -> Vec<LabeledSpan> {
    doc.components
        .iter()
        .map(|c| {
            let s = c.stance.map_or("", |s| s.as_str());
            let t = c.target.map(|t| t.to_string()).unwrap_or_default();
            LabeledSpan::new(offset + c.start, offset + c.end + 1, format!("{}:{t}:{s}", c.kind))
        })
        .collect()
}
