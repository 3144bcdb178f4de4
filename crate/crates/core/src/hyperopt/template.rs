use std::collections::BTreeSet;

use serde_yaml::Value;

use super::{Assignment, HyperoptError};

/// Calls `f` for every literal chunk and every `${name}` placeholder.
fn scan<'a>(text: &'a str, mut f: impl FnMut(Result<&'a str, &'a str>)) {
    let mut rest = text;
    while let Some(open) = rest.find("${") {
        match rest[open + 2..].find('}') {
            Some(len) => {
                f(Ok(&rest[..open]));
                f(Err(&rest[open + 2..open + 2 + len]));
                rest = &rest[open + 3 + len..];
            }
            None => break,
        }
    }
    f(Ok(rest));
}

/// Names of all `${name}` placeholders in `text`.
pub fn template_variables(text: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    scan(text, |piece| {
        if let Err(name) = piece {
            out.insert(name.trim().to_owned());
        }
    });
    out
}

/// YAML spelling of a sampled value, without document markers.
pub fn yaml_scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => {
            let dumped = serde_yaml::to_string(s).expect("strings serialise");
            dumped.trim_end().to_owned()
        }
        other => {
            let dumped = serde_yaml::to_string(other).expect("values serialise");
            dumped.trim_end().to_owned()
        }
    }
}

/// Replaces every placeholder with its value.
pub fn render_template(text: &str, assignment: &Assignment) -> Result<String, HyperoptError> {
    let mut out = String::with_capacity(text.len());
    let mut missing = None;
    scan(text, |piece| match piece {
        Ok(lit) => out.push_str(lit),
        Err(name) => match assignment.get(name.trim()) {
            Some(v) => out.push_str(&yaml_scalar(v)),
            None => {
                missing.get_or_insert_with(|| name.trim().to_owned());
            }
        },
    });
    match missing {
        Some(name) => Err(HyperoptError::Unbound(name)),
        None => Ok(out),
    }
}

/// Replaces every placeholder with a neutral token so the surrounding
/// document can be parsed before any value is known.
pub fn mask_template(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    scan(text, |piece| match piece {
        Ok(lit) => out.push_str(lit),
        Err(name) => {
            out.push_str("__");
            out.push_str(name.trim());
            out.push_str("__");
        }
    });
    out
}
