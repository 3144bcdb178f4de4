use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::{LabelError, Prefix};

/// Placeholder for an unfilled field.
pub const BOTTOM: &str = "⊥";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AmType {
    Premise,
    Claim,
    MajorClaim,
}

impl AmType {
    pub fn as_str(self) -> &'static str {
        match self {
            AmType::Premise => "P",
            AmType::Claim => "C",
            AmType::MajorClaim => "MC",
        }
    }
}

impl fmt::Display for AmType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stance {
    Supp,
    Att,
    For,
    Ag,
}

impl Stance {
    pub fn as_str(self) -> &'static str {
        match self {
            Stance::Supp => "Supp",
            Stance::Att => "Att",
            Stance::For => "For",
            Stance::Ag => "Ag",
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Stance::Supp | Stance::For)
    }

    /// The stance of the same polarity that is admissible for `kind`.
    pub fn for_type(self, kind: AmType) -> Option<Stance> {
        match (kind, self.is_positive()) {
            (AmType::Premise, true) => Some(Stance::Supp),
            (AmType::Premise, false) => Some(Stance::Att),
            (AmType::Claim, true) => Some(Stance::For),
            (AmType::Claim, false) => Some(Stance::Ag),
            (AmType::MajorClaim, _) => None,
        }
    }

    pub fn admissible(self, kind: AmType) -> bool {
        self.for_type(kind) == Some(self)
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Spellings accepted for component types and stances besides the
/// canonical short names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmAliases {
    pub types: HashMap<String, AmType>,
    pub stances: HashMap<String, Stance>,
}

impl Default for AmAliases {
    fn default() -> Self {
        let types = [
            ("P", AmType::Premise),
            ("C", AmType::Claim),
            ("MC", AmType::MajorClaim),
            ("Premise", AmType::Premise),
            ("Claim", AmType::Claim),
            ("MajorClaim", AmType::MajorClaim),
        ];
        let stances = [
            ("Supp", Stance::Supp),
            ("Att", Stance::Att),
            ("For", Stance::For),
            ("Ag", Stance::Ag),
            ("Support", Stance::Supp),
            ("Attack", Stance::Att),
            ("Against", Stance::Ag),
        ];
        AmAliases {
            types: types.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            stances: stances.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

impl AmAliases {
    pub fn with_type(mut self, spelling: impl Into<String>, kind: AmType) -> Self {
        self.types.insert(spelling.into(), kind);
        self
    }
}

/// Token label `(b, t, d, s)` of argumentation mining. `d` is the link
/// distance in components relative to the token's own component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AmLabel {
    pub b: Prefix,
    pub t: Option<AmType>,
    pub d: Option<i32>,
    pub s: Option<Stance>,
}

impl AmLabel {
    pub const OUTSIDE: AmLabel = AmLabel {
        b: Prefix::O,
        t: None,
        d: None,
        s: None,
    };

    pub fn premise(b: Prefix, d: i32, s: Stance) -> Self {
        AmLabel {
            b,
            t: Some(AmType::Premise),
            d: Some(d),
            s: Some(s),
        }
    }

    pub fn claim(b: Prefix, s: Stance) -> Self {
        AmLabel {
            b,
            t: Some(AmType::Claim),
            d: None,
            s: Some(s),
        }
    }

    pub fn major_claim(b: Prefix) -> Self {
        AmLabel {
            b,
            t: Some(AmType::MajorClaim),
            d: None,
            s: None,
        }
    }

    /// Checks the field constraints. Besides the per-type rules, a token
    /// inside a component must carry a type.
    pub fn check(&self) -> Result<(), &'static str> {
        match (self.b, self.t) {
            (Prefix::O, None) if self.d.is_none() && self.s.is_none() => Ok(()),
            (Prefix::O, _) => Err("O carries no type, distance or stance"),
            (_, None) => Err("B and I labels need a component type"),
            (_, Some(AmType::MajorClaim)) if self.d.is_some() || self.s.is_some() => {
                Err("a major claim has neither distance nor stance")
            }
            (_, Some(AmType::Claim)) if self.d.is_some() => Err("a claim has no distance"),
            (_, Some(AmType::Claim)) if !matches!(self.s, Some(Stance::For | Stance::Ag)) => {
                Err("a claim's stance is For or Ag")
            }
            (_, Some(AmType::Premise)) if matches!(self.d, None | Some(0)) => {
                Err("a premise needs a non-zero distance")
            }
            (_, Some(AmType::Premise)) if !matches!(self.s, Some(Stance::Supp | Stance::Att)) => {
                Err("a premise's stance is Supp or Att")
            }
            _ => Ok(()),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    pub fn parse_with(text: &str, aliases: &AmAliases) -> Result<AmLabel, LabelError> {
        let format = |reason: String| LabelError::AmFormat {
            label: text.to_owned(),
            reason,
        };
        let fields: Vec<&str> = text.split(':').collect();
        let label = match fields.as_slice() {
            ["O"] => AmLabel::OUTSIDE,
            [b, t, d, s] => {
                let b = Prefix::parse(b).ok_or_else(|| format(format!("bad BIO flag {b:?}")))?;
                let t = match *t {
                    BOTTOM => None,
                    t => Some(
                        *aliases
                            .types
                            .get(t)
                            .ok_or_else(|| format(format!("unknown component type {t:?}")))?,
                    ),
                };
                let d = match *d {
                    BOTTOM => None,
                    d => Some(
                        d.parse::<i32>()
                            .map_err(|_| format(format!("bad distance {d:?}")))?,
                    ),
                };
                let s = match *s {
                    BOTTOM => None,
                    s => Some(
                        *aliases
                            .stances
                            .get(s)
                            .ok_or_else(|| format(format!("unknown stance {s:?}")))?,
                    ),
                };
                AmLabel { b, t, d, s }
            }
            _ => return Err(format("expected \"O\" or four colon-separated fields".into())),
        };
        label.check().map_err(|reason| LabelError::AmInvariant {
            label: text.to_owned(),
            reason,
        })?;
        Ok(label)
    }
}

impl FromStr for AmLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AmLabel::parse_with(s, &AmAliases::default())
    }
}

pub fn parse_am_label(text: &str) -> Result<AmLabel, LabelError> {
    text.parse()
}

impl fmt::Display for AmLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b == Prefix::O {
            return f.write_str("O");
        }
        let t = self.t.map_or(BOTTOM, AmType::as_str);
        let s = self.s.map_or(BOTTOM, Stance::as_str);
        match self.d {
            Some(d) => write!(f, "{}:{t}:{d}:{s}", self.b.as_str()),
            None => write!(f, "{}:{t}:{BOTTOM}:{s}", self.b.as_str()),
        }
    }
}

pub fn parse_am_sequence<S: AsRef<str>>(seq: &[S], aliases: &AmAliases) -> Result<Vec<AmLabel>, LabelError> {
    seq.iter().map(|s| AmLabel::parse_with(s.as_ref(), aliases)).collect()
}
