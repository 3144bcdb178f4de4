use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use super::{Corpus, CorpusError};

/// Word vectors of a fixed dimension, possibly concatenated from several
/// sources.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmbeddingSet {
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
    dim: usize,
    source_dims: Vec<usize>,
}

impl EmbeddingSet {
    fn from_parts(words: Vec<String>, vectors: Vec<f64>, dim: usize, source_dims: Vec<usize>) -> Self {
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        EmbeddingSet {
            words,
            index,
            vectors,
            dim,
            source_dims,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source_dims(&self) -> &[usize] {
        &self.source_dims
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        let i = *self.index.get(word)?;
        Some(&self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    /// Renders the set in the plain text format (no header line).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for v in &self.vectors[i * self.dim..(i + 1) * self.dim] {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }
}

fn is_header(cols: &[&str]) -> bool {
    cols.len() == 2 && cols.iter().all(|c| c.parse::<usize>().is_ok())
}

/// Parses `word v₁ … v_d` lines; an initial `count dim` header is skipped.
pub fn parse_embeddings(text: &str, file: &str) -> Result<EmbeddingSet, CorpusError> {
    let mut words = Vec::new();
    let mut vectors = Vec::new();
    let mut dim: Option<usize> = None;
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if i == 0 && is_header(&cols) {
            continue;
        }
        let format = |message: String| CorpusError::EmbeddingFormat {
            file: file.to_owned(),
            line: i + 1,
            message,
        };
        let d = cols.len() - 1;
        match dim {
            None if d == 0 => return Err(format("word without vector".into())),
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(format(format!("expected {expected} components, found {d}")))
            }
            Some(_) => {}
        }
        for c in &cols[1..] {
            let v: f64 = c
                .parse()
                .map_err(|_| format(format!("invalid number {c:?}")))?;
            vectors.push(v);
        }
        if !seen.insert(cols[0].to_owned()) {
            // Keep the first vector of duplicated words.
            vectors.truncate(vectors.len() - d);
            continue;
        }
        words.push(cols[0].to_owned());
    }
    let dim = dim.unwrap_or(0);
    Ok(EmbeddingSet::from_parts(words, vectors, dim, vec![dim]))
}

/// Concatenates several embedding sets over the intersection of their
/// vocabularies, in the word order of the first set.
pub fn build_embedding_set(sources: &[(String, EmbeddingSet)]) -> Result<EmbeddingSet, CorpusError> {
    let Some((_, first)) = sources.first() else {
        return Ok(EmbeddingSet::default());
    };
    if sources.len() == 1 {
        return Ok(first.clone());
    }
    let dim: usize = sources.iter().map(|(_, s)| s.dim).sum();
    let mut words = Vec::new();
    let mut vectors = Vec::new();
    for w in first.words() {
        if sources.iter().all(|(_, s)| s.contains(w)) {
            words.push(w.to_owned());
            for (_, s) in sources {
                vectors.extend_from_slice(s.vector(w).expect("checked membership"));
            }
        }
    }
    if words.is_empty() {
        // Name the first pair whose intersection is already empty.
        let (mut a, mut b) = (0, 1);
        'outer: for i in 0..sources.len() {
            for j in i + 1..sources.len() {
                if !sources[i].1.words().any(|w| sources[j].1.contains(w)) {
                    (a, b) = (i, j);
                    break 'outer;
                }
            }
        }
        return Err(CorpusError::EmptyIntersection {
            first: sources[a].0.clone(),
            second: sources[b].0.clone(),
        });
    }
    let source_dims = sources.iter().flat_map(|(_, s)| s.source_dims.iter().copied()).collect();
    Ok(EmbeddingSet::from_parts(words, vectors, dim, source_dims))
}

/// Reads and concatenates embedding files.
pub fn read_embedding_files(paths: &[impl AsRef<Path>]) -> Result<EmbeddingSet, CorpusError> {
    let mut sources = Vec::with_capacity(paths.len());
    for p in paths {
        let p = p.as_ref();
        let text = std::fs::read_to_string(p).map_err(|source| CorpusError::Io {
            path: p.to_owned(),
            source,
        })?;
        let name = p.display().to_string();
        let set = parse_embeddings(&text, &name)?;
        sources.push((name, set));
    }
    build_embedding_set(&sources)
}

/// Keeps only vectors that some corpus token resolves to: its exact form
/// if present, otherwise its lowercase form.
pub fn prune_embeddings(emb: &EmbeddingSet, corpora: &[&Corpus]) -> EmbeddingSet {
    let mut keep = HashSet::new();
    for token in corpora
        .iter()
        .flat_map(|c| c.sentences.iter())
        .flat_map(|s| s.tokens.iter())
    {
        if emb.contains(&token.surface) {
            keep.insert(token.surface.clone());
        } else {
            let lower = token.surface.to_lowercase();
            if emb.contains(&lower) {
                keep.insert(lower);
            }
        }
    }
    let mut words = Vec::new();
    let mut vectors = Vec::new();
    for w in emb.words() {
        if keep.contains(w) {
            words.push(w.to_owned());
            vectors.extend_from_slice(emb.vector(w).expect("word from set"));
        }
    }
    EmbeddingSet::from_parts(words, vectors, emb.dim, emb.source_dims.clone())
}
