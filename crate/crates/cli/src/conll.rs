use std::ops::Range;
use std::path::Path;

use mtl_tagger::corpus::{Corpus, RawConll, Sentence, DOC_START};
use mtl_tagger::labels::{am_postprocess, correct_bio_strings, parse_am_sequence, AmAliases, Repair};
use mtl_tagger::run::RunError;

use crate::Postprocess;

pub fn read_text(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write_text(text: &str, path: Option<&Path>) -> Result<(), RunError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
                    path: dir.to_owned(),
                    source,
                })?;
            }
            std::fs::write(p, text).map_err(|source| RunError::Io {
                path: p.to_owned(),
                source,
            })
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Values of column `col` for every sentence.
pub fn column(raw: &RawConll, col: usize) -> Result<Vec<Vec<String>>, RunError> {
    raw.sentences
        .iter()
        .zip(&raw.lines)
        .map(|(sent, lines)| {
            sent.iter()
                .zip(lines)
                .map(|(cols, line)| {
                    cols.get(col).cloned().ok_or_else(|| {
                        RunError::Data(format!("line {line}: no column {col} ({} columns)", cols.len()))
                    })
                })
                .collect()
        })
        .collect()
}

pub fn documents(raw: &RawConll) -> Vec<Range<usize>> {
    Corpus {
        sentences: vec![Sentence::default(); raw.sentences.len()],
        doc_starts: raw.doc_starts.clone(),
    }
    .documents()
}

/// Tab-separated rendering with document markers.
pub fn render(raw: &RawConll) -> String {
    let starts = raw.doc_starts.as_deref().unwrap_or(&[]);
    let mut out = String::new();
    for (i, sent) in raw.sentences.iter().enumerate() {
        if starts.contains(&i) {
            out.push_str(DOC_START);
            out.push_str("\n\n");
        }
        for cols in sent {
            out.push_str(&cols.join("\t"));
            out.push('\n');
        }
        out.push('\n');
    }
    for _ in starts.iter().filter(|&&s| s >= raw.sentences.len()) {
        out.push_str(DOC_START);
        out.push_str("\n\n");
    }
    out
}

pub fn append_column(raw: &mut RawConll, values: &[Vec<String>]) {
    for (sent, vals) in raw.sentences.iter_mut().zip(values) {
        for (cols, v) in sent.iter_mut().zip(vals) {
            cols.push(v.clone());
        }
    }
}

pub fn replace_column(raw: &mut RawConll, col: usize, values: &[Vec<String>]) {
    for (sent, vals) in raw.sentences.iter_mut().zip(values) {
        for (cols, v) in sent.iter_mut().zip(vals) {
            cols[col] = v.clone();
        }
    }
}

fn data(e: impl std::fmt::Display) -> RunError {
    RunError::Data(e.to_string())
}

/// Applies `f` to each document's labels, sentences concatenated, and
/// splits the result back into sentences.
pub fn per_document(
    labels: &[Vec<String>],
    docs: &[Range<usize>],
    mut f: impl FnMut(&[String]) -> Result<Vec<String>, RunError>,
) -> Result<Vec<Vec<String>>, RunError> {
    let mut out = Vec::with_capacity(labels.len());
    for r in docs {
        let flat: Vec<String> = labels[r.clone()].iter().flatten().cloned().collect();
        let mapped = f(&flat)?;
        let mut it = mapped.into_iter();
        for s in &labels[r.clone()] {
            out.push(it.by_ref().take(s.len()).collect());
        }
    }
    Ok(out)
}

pub fn repair(labels: Vec<Vec<String>>, docs: &[Range<usize>], scheme: Postprocess) -> Result<Vec<Vec<String>>, RunError> {
    let bio = |r: Repair| -> Result<Vec<Vec<String>>, RunError> {
        labels.iter().map(|s| correct_bio_strings(s, r).map_err(data)).collect()
    };
    match scheme {
        Postprocess::None => Ok(labels),
        Postprocess::Bio => bio(Repair::ToBegin),
        Postprocess::BioOutside => bio(Repair::ToOutside),
        Postprocess::Am => {
            let aliases = AmAliases::default();
            per_document(&labels, docs, |flat| {
                let parsed = parse_am_sequence(flat, &aliases).map_err(data)?;
                Ok(am_postprocess(&parsed).iter().map(ToString::to_string).collect())
            })
        }
    }
}
