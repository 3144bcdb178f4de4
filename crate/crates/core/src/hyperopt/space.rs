use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_yaml::Value;

use super::HyperoptError;

/// Range of values a search variable may take.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval", into = "RawInterval")]
pub enum Interval {
    /// A finite set of values.
    List(Vec<Value>),
    /// Integers `[start, end]`, both ends included.
    Discrete(i64, i64),
    /// Reals `[start, end)`.
    Continuous(f64, f64),
}

/// Written as a one-key map, e.g. `{discrete: [0, 5]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInterval {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    list: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    discrete: Option<(i64, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    continuous: Option<(f64, f64)>,
}

impl TryFrom<RawInterval> for Interval {
    type Error = String;

    fn try_from(r: RawInterval) -> Result<Self, String> {
        match (r.list, r.discrete, r.continuous) {
            (Some(v), None, None) => Ok(Interval::List(v)),
            (None, Some((a, b)), None) => Ok(Interval::Discrete(a, b)),
            (None, None, Some((a, b))) => Ok(Interval::Continuous(a, b)),
            _ => Err("an interval needs exactly one of list, discrete, continuous".into()),
        }
    }
}

impl From<Interval> for RawInterval {
    fn from(iv: Interval) -> Self {
        let mut r = RawInterval {
            list: None,
            discrete: None,
            continuous: None,
        };
        match iv {
            Interval::List(v) => r.list = Some(v),
            Interval::Discrete(a, b) => r.discrete = Some((a, b)),
            Interval::Continuous(a, b) => r.continuous = Some((a, b)),
        }
        r
    }
}

impl Interval {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            Interval::List(ref v) if v.is_empty() => Err("empty value list".into()),
            Interval::Discrete(a, b) if a > b => Err(format!("discrete range [{a}..{b}] is empty")),
            Interval::Continuous(a, b) if !(a < b) || !a.is_finite() || !b.is_finite() => {
                Err(format!("continuous range [{a}, {b}) is empty or not finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Value {
        match self {
            Interval::List(v) => v[rng.gen_range(0..v.len())].clone(),
            Interval::Discrete(a, b) => Value::from(rng.gen_range(*a..=*b)),
            Interval::Continuous(a, b) => Value::from(rng.gen_range(*a..*b)),
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match self {
            Interval::List(vs) => vs.contains(v),
            Interval::Discrete(a, b) => v.as_i64().is_some_and(|x| (*a..=*b).contains(&x)),
            Interval::Continuous(a, b) => v.as_f64().is_some_and(|x| (*a..*b).contains(&x)),
        }
    }
}

/// Named search variables.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SearchSpace {
    pub variables: BTreeMap<String, Interval>,
}

/// Variable name to sampled value.
pub type Assignment = BTreeMap<String, Value>;

impl SearchSpace {
    pub fn validate(&self) -> Result<(), HyperoptError> {
        for (name, iv) in &self.variables {
            iv.validate()
                .map_err(|m| HyperoptError::Space(format!("variable {name:?}: {m}")))?;
        }
        Ok(())
    }

    /// Draws one value per variable, in name order.
    pub fn sample_trial(&self, rng: &mut ChaCha8Rng) -> Assignment {
        self.variables
            .iter()
            .map(|(name, iv)| (name.clone(), iv.sample(rng)))
            .collect()
    }
}
