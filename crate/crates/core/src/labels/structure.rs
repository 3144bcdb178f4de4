//! Argument structure: components, links and structure repair.

use std::collections::HashMap;
use std::hash::Hash;

use super::{AmLabel, AmType, LabelError, Prefix, Stance};

/// An argument component over inclusive token indices of one document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentSpan {
    pub start: usize,
    pub end: usize,
    pub kind: AmType,
    pub stance: Option<Stance>,
    /// Relative link distance in components.
    pub distance: Option<i32>,
    /// Absolute index of the linked component.
    pub target: Option<usize>,
}

impl ComponentSpan {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn label(&self, b: Prefix) -> AmLabel {
        AmLabel {
            b,
            t: Some(self.kind),
            d: self.distance,
            s: self.stance,
        }
    }
}

fn structure_error(index: usize, reason: &str) -> LabelError {
    LabelError::Structure {
        index,
        reason: reason.to_owned(),
    }
}

/// Maximal `B I*` runs of a valid label sequence.
pub fn components_from_labels(seq: &[AmLabel]) -> Result<Vec<ComponentSpan>, LabelError> {
    let mut out: Vec<ComponentSpan> = Vec::new();
    for (k, l) in seq.iter().enumerate() {
        l.check().map_err(|r| structure_error(k, r))?;
        match l.b {
            Prefix::O => {}
            Prefix::B => out.push(ComponentSpan {
                start: k,
                end: k,
                kind: l.t.expect("checked label"),
                stance: l.s,
                distance: l.d,
                target: None,
            }),
            Prefix::I => {
                let open = k > 0 && seq[k - 1].b != Prefix::O;
                let Some(c) = out.last_mut().filter(|_| open) else {
                    return Err(structure_error(k, "I without a preceding B or I; repair the BIO structure first"));
                };
                if c.label(Prefix::I) != *l {
                    return Err(LabelError::Heterogeneous {
                        start: c.start,
                        end: k,
                    });
                }
                c.end = k;
            }
        }
    }
    Ok(out)
}

/// Token labels of `len` tokens with the given components. Premises need a
/// relative distance or an absolute target.
pub fn components_to_labels(components: &[ComponentSpan], len: usize) -> Vec<AmLabel> {
    let mut out = vec![AmLabel::OUTSIDE; len];
    for (k, c) in components.iter().enumerate() {
        let mut c = c.clone();
        if c.kind == AmType::Premise && c.distance.is_none() {
            c.distance = c.target.map(|t| t as i32 - k as i32);
        }
        for (i, slot) in out[c.start..=c.end].iter_mut().enumerate() {
            *slot = c.label(if i == 0 { Prefix::B } else { Prefix::I });
        }
    }
    out
}

/// Fills absolute targets from relative distances.
pub fn rel_to_abs(components: &[ComponentSpan]) -> Result<Vec<ComponentSpan>, LabelError> {
    let n = components.len() as i64;
    components
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let mut c = c.clone();
            c.target = match (c.kind, c.distance) {
                (AmType::Premise, Some(d)) => {
                    let t = k as i64 + d as i64;
                    if t < 0 || t >= n || t == k as i64 {
                        return Err(LabelError::LinkOutOfRange {
                            component: k,
                            target: t,
                            count: components.len(),
                        });
                    }
                    Some(t as usize)
                }
                (AmType::Premise, None) => return Err(structure_error(k, "premise without distance")),
                _ => None,
            };
            Ok(c)
        })
        .collect()
}

/// Fills relative distances from absolute targets.
pub fn abs_to_rel(components: &[ComponentSpan]) -> Result<Vec<ComponentSpan>, LabelError> {
    components
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let mut c = c.clone();
            c.distance = match (c.kind, c.target) {
                (AmType::Premise, Some(t)) if t != k && t < components.len() => Some(t as i32 - k as i32),
                (AmType::Premise, Some(t)) => {
                    return Err(LabelError::LinkOutOfRange {
                        component: k,
                        target: t as i64,
                        count: components.len(),
                    })
                }
                (AmType::Premise, None) => return Err(structure_error(k, "premise without target")),
                _ => None,
            };
            Ok(c)
        })
        .collect()
}

/// Most frequent value; ties go to the value that sorts first by `key`.
fn majority<T: Copy + Eq + Hash, K: Ord>(values: impl IntoIterator<Item = T>, key: impl Fn(&T) -> K) -> Option<T> {
    let mut counts: HashMap<T, usize> = HashMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|(a, ca), (b, cb)| ca.cmp(cb).then_with(|| key(b).cmp(&key(a))))
        .map(|(v, _)| v)
}

/// Repairs raw predictions of one document into a valid structure:
///
/// 1. stray `I` tokens open a component (`ToBegin` on the BIO flags);
/// 2. within a component, type, distance and stance each take their
///    majority value;
/// 3. premise links are clamped to existing components other than the
///    premise itself.
///
/// Ties in step 2 prefer the smallest `|d|`, then positive `d`, then the
/// lexicographically smallest name. A lone premise has nothing to link to
/// and becomes a claim of the same polarity.
pub fn am_postprocess(seq: &[AmLabel]) -> Vec<AmLabel> {
    // Tokens inside a component without a type cannot be interpreted.
    let flags: Vec<Prefix> = seq
        .iter()
        .map(|l| if l.t.is_none() { Prefix::O } else { l.b })
        .collect();

    let mut spans: Vec<(usize, usize)> = Vec::new();
    for (k, &b) in flags.iter().enumerate() {
        match b {
            Prefix::O => {}
            Prefix::I if k > 0 && flags[k - 1] != Prefix::O => spans.last_mut().expect("open span").1 = k,
            _ => spans.push((k, k)),
        }
    }

    let n = spans.len();
    let mut components = Vec::with_capacity(n);
    for (k, &(start, end)) in spans.iter().enumerate() {
        let tokens = &seq[start..=end];
        let kind = majority(tokens.iter().filter_map(|l| l.t), |t| t.as_str()).expect("typed tokens");
        let stance = (kind != AmType::MajorClaim).then(|| {
            majority(tokens.iter().filter_map(|l| l.s?.for_type(kind)), |s| s.as_str())
                .unwrap_or_else(|| Stance::Supp.for_type(kind).expect("not a major claim"))
        });
        let mut c = ComponentSpan {
            start,
            end,
            kind,
            stance,
            distance: None,
            target: None,
        };
        if kind == AmType::Premise {
            let d = majority(tokens.iter().filter_map(|l| l.d).filter(|&d| d != 0), |&d| {
                (d.unsigned_abs(), d < 0)
            })
            .unwrap_or(-1);
            let target = (k as i64 + d as i64).clamp(0, n as i64 - 1) as usize;
            let target = match target {
                t if t != k => Some(t),
                _ if k > 0 => Some(k - 1),
                _ if n > 1 => Some(k + 1),
                _ => None,
            };
            match target {
                Some(t) => c.distance = Some(t as i32 - k as i32),
                None => {
                    c.kind = AmType::Claim;
                    c.stance = stance.and_then(|s| s.for_type(AmType::Claim));
                }
            }
        }
        components.push(c);
    }
    components_to_labels(&components, seq.len())
}
