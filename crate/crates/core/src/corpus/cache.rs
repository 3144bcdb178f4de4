//! Binary corpus cache.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        8 bytes  "MTLCORPC"
//! version      u32
//! source size  u64
//! source hash  32 bytes (SHA-256 of the source file)
//! vocab len    u64, then JSON {columns, tokens, labels, doc_starts}
//! body len     u64, then u32 sentence count; per sentence a u32 token
//!              count followed by, per token, a u32 surface index and one
//!              u32 label index per label column
//! ```
//!
//! A cache is reused only if size, hash, version and column spec all match.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{parse_conll, ColumnSpec, Corpus, CorpusError, Indexer, Sentence, Token};

pub const CACHE_MAGIC: [u8; 8] = *b"MTLCORPC";
pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("not a corpus cache (bad magic bytes)")]
    BadMagic,
    #[error("unsupported cache version {0}")]
    Version(u32),
    #[error("cache file is truncated")]
    Truncated,
    #[error("cache is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Serialize, Deserialize)]
struct VocabSection {
    columns: ColumnSpec,
    tokens: Indexer,
    labels: Vec<Indexer>,
    doc_starts: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Fingerprint {
    size: u64,
    hash: [u8; 32],
}

impl Fingerprint {
    fn of(bytes: &[u8]) -> Self {
        Fingerprint {
            size: bytes.len() as u64,
            hash: Sha256::digest(bytes).into(),
        }
    }
}

fn encode(corpus: &Corpus, columns: &ColumnSpec, fp: Fingerprint) -> Vec<u8> {
    let mut tokens = Indexer::default();
    let mut labels = vec![Indexer::default(); columns.labels.len()];
    let mut body = Vec::new();
    body.extend_from_slice(&(corpus.sentences.len() as u32).to_le_bytes());
    for s in &corpus.sentences {
        body.extend_from_slice(&(s.tokens.len() as u32).to_le_bytes());
        for t in &s.tokens {
            body.extend_from_slice(&(tokens.insert(&t.surface) as u32).to_le_bytes());
            for ((task, _), ix) in columns.labels.iter().zip(labels.iter_mut()) {
                let l = t.labels.get(task).map(String::as_str).unwrap_or_default();
                body.extend_from_slice(&(ix.insert(l) as u32).to_le_bytes());
            }
        }
    }
    let vocab = serde_json::to_vec(&VocabSection {
        columns: columns.clone(),
        tokens,
        labels,
        doc_starts: corpus.doc_starts.clone(),
    })
    .expect("vocabulary serialises");

    let mut out = Vec::with_capacity(64 + vocab.len() + body.len());
    out.extend_from_slice(&CACHE_MAGIC);
    out.extend_from_slice(&CACHE_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&fp.size.to_le_bytes());
    out.extend_from_slice(&fp.hash);
    out.extend_from_slice(&(vocab.len() as u64).to_le_bytes());
    out.extend_from_slice(&vocab);
    out.extend_from_slice(&(body.len() as u64).to_le_bytes());
    out.extend_from_slice(&body);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CacheError> {
        let end = self.pos.checked_add(n).ok_or(CacheError::Truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or(CacheError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

fn decode_header(bytes: &[u8]) -> Result<(Fingerprint, Reader<'_>), CacheError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != CACHE_MAGIC {
        return Err(CacheError::BadMagic);
    }
    let version = r.u32()?;
    if version != CACHE_FORMAT_VERSION {
        return Err(CacheError::Version(version));
    }
    let size = r.u64()?;
    let hash: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
    Ok((Fingerprint { size, hash }, r))
}

fn decode(bytes: &[u8]) -> Result<(Fingerprint, ColumnSpec, Corpus), CacheError> {
    let (fp, mut r) = decode_header(bytes)?;
    let vlen = r.u64()? as usize;
    let vocab: VocabSection = serde_json::from_slice(r.take(vlen)?)
        .map_err(|e| CacheError::Corrupt(e.to_string()))?;
    let _body_len = r.u64()?;
    let lookup = |ix: &Indexer, i: u32| {
        ix.name(i as usize)
            .map(str::to_owned)
            .ok_or_else(|| CacheError::Corrupt(format!("index {i} out of range")))
    };
    let n = r.u32()? as usize;
    let mut sentences = Vec::with_capacity(n);
    for _ in 0..n {
        let len = r.u32()? as usize;
        let mut tokens = Vec::with_capacity(len);
        for _ in 0..len {
            let surface = lookup(&vocab.tokens, r.u32()?)?;
            let mut labels = std::collections::BTreeMap::new();
            for ((task, _), ix) in vocab.columns.labels.iter().zip(&vocab.labels) {
                labels.insert(task.clone(), lookup(ix, r.u32()?)?);
            }
            tokens.push(Token { surface, labels });
        }
        sentences.push(Sentence { tokens });
    }
    Ok((
        fp,
        vocab.columns,
        Corpus {
            sentences,
            doc_starts: vocab.doc_starts,
        },
    ))
}

fn cache_path(source: &Path, columns: &ColumnSpec, cache_dir: &Path) -> PathBuf {
    let mut h = Sha256::new();
    h.update(source.display().to_string().as_bytes());
    h.update(serde_json::to_vec(columns).expect("column spec serialises"));
    let digest = h.finalize();
    let tag: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    let stem = source
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into());
    cache_dir.join(format!("{stem}.{tag}.cache"))
}

/// Reads a CoNLL file through the cache in `cache_dir`, rebuilding the
/// cache when the source changed. Returns the corpus and whether the cache
/// was used.
pub fn load_cached(
    source: &Path,
    columns: &ColumnSpec,
    cache_dir: &Path,
) -> Result<(Corpus, bool), CacheError> {
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| CacheError::Io { path, source }
    };
    let text = std::fs::read(source).map_err(io(source))?;
    let fp = Fingerprint::of(&text);
    let path = cache_path(source, columns, cache_dir);
    if let Ok(bytes) = std::fs::read(&path) {
        if let Ok((cached_fp, cached_cols, corpus)) = decode(&bytes) {
            if cached_fp == fp && &cached_cols == columns {
                return Ok((corpus, true));
            }
        }
    }
    let text_str = String::from_utf8_lossy(&text);
    let corpus = parse_conll(&text_str, columns)?;
    std::fs::create_dir_all(cache_dir).map_err(io(cache_dir))?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, encode(&corpus, columns, fp)).map_err(io(&tmp))?;
    std::fs::rename(&tmp, &path).map_err(io(&path))?;
    Ok((corpus, false))
}
