use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AmLabel, AmType, BioLabel, LabelError, Prefix};

/// Natural subtasks obtained by projecting the AM label onto fewer fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Subtask {
    /// Component segmentation: `b` only.
    Acs,
    /// Component identification: `b` and `t`.
    Aci,
    /// Relation segmentation: spans of components with an outgoing relation.
    Ars,
    /// Relation identification: `b`, `t` and `s`.
    Ari,
}

impl Subtask {
    pub const ALL: [Subtask; 4] = [Subtask::Acs, Subtask::Aci, Subtask::Ars, Subtask::Ari];

    pub fn as_str(self) -> &'static str {
        match self {
            Subtask::Acs => "ACS",
            Subtask::Aci => "ACI",
            Subtask::Ars => "ARS",
            Subtask::Ari => "ARI",
        }
    }
}

impl fmt::Display for Subtask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subtask {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subtask::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| LabelError::UnknownSubtask(s.to_owned()))
    }
}

impl TryFrom<String> for Subtask {
    type Error = LabelError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Subtask> for String {
    fn from(k: Subtask) -> Self {
        k.as_str().to_owned()
    }
}

fn prefixed(b: Prefix, class: &str) -> String {
    format!("{}-{class}", b.as_str())
}

pub fn derive_label(label: &AmLabel, kind: Subtask) -> String {
    let (b, t) = match (label.b, label.t) {
        (Prefix::O, _) | (_, None) => return "O".to_owned(),
        (b, Some(t)) => (b, t),
    };
    match kind {
        Subtask::Acs => prefixed(b, "Arg"),
        Subtask::Aci => prefixed(b, t.as_str()),
        Subtask::Ars if t == AmType::MajorClaim => "O".to_owned(),
        Subtask::Ars => prefixed(b, "Rel"),
        Subtask::Ari => match label.s {
            Some(s) if t != AmType::MajorClaim => prefixed(b, &format!("{t}:{s}")),
            _ => prefixed(b, t.as_str()),
        },
    }
}

pub fn derive_subtask(seq: &[AmLabel], kind: Subtask) -> Vec<String> {
    seq.iter().map(|l| derive_label(l, kind)).collect()
}

/// Projects a BIO label of any class onto the segmentation label set
/// `{B-class, I-class, O}`. Returns `None` for non-BIO labels.
pub fn segmentation_label(label: &str, class: &str) -> Option<String> {
    let l = BioLabel::parse(label)?;
    Some(match l.prefix {
        Prefix::O => "O".to_owned(),
        b => prefixed(b, class),
    })
}
