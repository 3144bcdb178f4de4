use std::fmt;

use super::LabelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prefix {
    B,
    I,
    O,
}

impl Prefix {
    pub fn as_str(self) -> &'static str {
        match self {
            Prefix::B => "B",
            Prefix::I => "I",
            Prefix::O => "O",
        }
    }

    pub fn parse(s: &str) -> Option<Prefix> {
        match s {
            "B" => Some(Prefix::B),
            "I" => Some(Prefix::I),
            "O" => Some(Prefix::O),
            _ => None,
        }
    }
}

/// A label of the BIO scheme: `B-class`, `I-class` or `O`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BioLabel {
    pub prefix: Prefix,
    /// Empty iff the prefix is `O`.
    pub class: String,
}

impl BioLabel {
    pub fn outside() -> Self {
        BioLabel {
            prefix: Prefix::O,
            class: String::new(),
        }
    }

    pub fn begin(class: impl Into<String>) -> Self {
        BioLabel {
            prefix: Prefix::B,
            class: class.into(),
        }
    }

    pub fn inside(class: impl Into<String>) -> Self {
        BioLabel {
            prefix: Prefix::I,
            class: class.into(),
        }
    }

    pub fn parse(s: &str) -> Option<BioLabel> {
        if s == "O" {
            return Some(BioLabel::outside());
        }
        let (p, class) = s.split_once('-')?;
        let prefix = match Prefix::parse(p)? {
            Prefix::O => return None,
            p => p,
        };
        if class.is_empty() {
            return None;
        }
        Some(BioLabel {
            prefix,
            class: class.to_owned(),
        })
    }

    pub fn is_outside(&self) -> bool {
        self.prefix == Prefix::O
    }
}

impl fmt::Display for BioLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.prefix {
            Prefix::O => f.write_str("O"),
            p => write!(f, "{}-{}", p.as_str(), self.class),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `I-` as the first label.
    AtStart,
    /// `I-` directly after `O`.
    AfterOutside,
    /// `I-` after a label of another class.
    ClassChange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
}

/// How [`correct_bio`] repairs an invalid `I-` label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Repair {
    /// Replace invalid labels with `O`. Validity is re-evaluated against the
    /// already corrected prefix, so a run behind an invalid head becomes `O`
    /// as a whole.
    ToOutside,
    /// Turn the first invalid `I-` of a run into `B-` of the same class.
    ToBegin,
}

fn violation(prev: Option<&BioLabel>, cur: &BioLabel) -> Option<ViolationKind> {
    if cur.prefix != Prefix::I {
        return None;
    }
    match prev {
        None => Some(ViolationKind::AtStart),
        Some(p) if p.is_outside() => Some(ViolationKind::AfterOutside),
        Some(p) if p.class != cur.class => Some(ViolationKind::ClassChange),
        Some(_) => None,
    }
}

pub fn validate_bio(seq: &[BioLabel]) -> Vec<Violation> {
    (0..seq.len())
        .filter_map(|k| {
            let prev = k.checked_sub(1).map(|j| &seq[j]);
            violation(prev, &seq[k]).map(|kind| Violation { index: k, kind })
        })
        .collect()
}

pub fn parse_bio_sequence<S: AsRef<str>>(seq: &[S]) -> Result<Vec<BioLabel>, LabelError> {
    seq.iter()
        .enumerate()
        .map(|(index, s)| {
            BioLabel::parse(s.as_ref()).ok_or_else(|| LabelError::Bio {
                index,
                label: s.as_ref().to_owned(),
            })
        })
        .collect()
}

/// [`validate_bio`] on label strings.
pub fn validate_bio_strings<S: AsRef<str>>(seq: &[S]) -> Result<Vec<Violation>, LabelError> {
    Ok(validate_bio(&parse_bio_sequence(seq)?))
}

pub fn correct_bio(seq: &[BioLabel], repair: Repair) -> Vec<BioLabel> {
    let mut out: Vec<BioLabel> = Vec::with_capacity(seq.len());
    for label in seq {
        let fixed = match violation(out.last(), label) {
            None => label.clone(),
            Some(_) => match repair {
                Repair::ToOutside => BioLabel::outside(),
                Repair::ToBegin => BioLabel::begin(label.class.clone()),
            },
        };
        out.push(fixed);
    }
    out
}

/// [`correct_bio`] on label strings.
pub fn correct_bio_strings<S: AsRef<str>>(seq: &[S], repair: Repair) -> Result<Vec<String>, LabelError> {
    Ok(correct_bio(&parse_bio_sequence(seq)?, repair)
        .iter()
        .map(ToString::to_string)
        .collect())
}

/// Maximal `B I*` runs as inclusive `(start, end, class)` triples. Stray
/// `I-` labels open a new span, as they would after a `ToBegin` repair.
pub fn bio_spans(seq: &[BioLabel]) -> Vec<(usize, usize, String)> {
    let mut spans: Vec<(usize, usize, String)> = Vec::new();
    let mut open = false;
    for (k, label) in seq.iter().enumerate() {
        match label.prefix {
            Prefix::O => open = false,
            Prefix::I if open && spans.last().is_some_and(|s| s.2 == label.class) => {
                spans.last_mut().expect("open span").1 = k;
            }
            _ => {
                spans.push((k, k, label.class.clone()));
                open = true;
            }
        }
    }
    spans
}
