//! Checkpoint files: a UTF-8 manifest, one blank line, then the raw
//! little-endian f64 payload of every tensor in registry order.
//!
//! ```text
//! MTLTAG-CHECKPOINT
//! version 1
//! config <json>
//! vocab <json>
//! tensor <name> <rows> <cols> <byte offset>
//! ...
//!
//! <payload>
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::Vocabulary;
use crate::network::{NetworkConfig, NetworkError, Tagger};
use crate::numeric::Tensor;

/// File name of the model checkpoint inside a run directory.
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const CHECKPOINT_MAGIC: &str = "MTLTAG-CHECKPOINT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0} (expected {CHECKPOINT_VERSION})")]
    Version(u32),
    #[error("malformed checkpoint manifest: {0}")]
    Manifest(String),
    #[error("checkpoint payload has {actual} bytes, manifest requires {expected}")]
    PayloadLength { expected: usize, actual: usize },
    #[error("checkpoint does not match its configuration: {0}")]
    Network(#[from] NetworkError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn manifest_err(m: impl Into<String>) -> CheckpointError {
    CheckpointError::Manifest(m.into())
}

pub fn encode_model(model: &Tagger) -> Vec<u8> {
    let mut head = format!("{CHECKPOINT_MAGIC}\nversion {CHECKPOINT_VERSION}\n");
    head.push_str(&format!(
        "config {}\n",
        serde_json::to_string(&model.config).expect("config serialises")
    ));
    head.push_str(&format!(
        "vocab {}\n",
        serde_json::to_string(&model.vocab).expect("vocabulary serialises")
    ));
    let mut offset = 0;
    for (_, name, t) in model.params.iter() {
        head.push_str(&format!("tensor {name} {} {} {offset}\n", t.rows(), t.cols()));
        offset += 8 * t.len();
    }
    head.push('\n');
    let mut out = head.into_bytes();
    out.reserve(offset);
    for (_, _, t) in model.params.iter() {
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn next_line<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a str, CheckpointError> {
    let rest = &bytes[*pos..];
    let end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| manifest_err("unterminated manifest"))?;
    *pos += end + 1;
    std::str::from_utf8(&rest[..end]).map_err(|_| manifest_err("manifest is not UTF-8"))
}

pub fn decode_model(bytes: &[u8]) -> Result<Tagger, CheckpointError> {
    if !bytes.starts_with(CHECKPOINT_MAGIC.as_bytes()) {
        return Err(CheckpointError::BadMagic);
    }
    let mut pos = 0;
    if next_line(bytes, &mut pos)? != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version: u32 = next_line(bytes, &mut pos)?
        .strip_prefix("version ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| manifest_err("missing version line"))?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::Version(version));
    }
    let config: NetworkConfig = next_line(bytes, &mut pos)?
        .strip_prefix("config ")
        .ok_or_else(|| manifest_err("missing config line"))
        .and_then(|j| serde_json::from_str(j).map_err(|e| manifest_err(format!("config: {e}"))))?;
    let vocab: Vocabulary = next_line(bytes, &mut pos)?
        .strip_prefix("vocab ")
        .ok_or_else(|| manifest_err("missing vocab line"))
        .and_then(|j| serde_json::from_str(j).map_err(|e| manifest_err(format!("vocab: {e}"))))?;

    let mut registry = Vec::new();
    loop {
        let line = next_line(bytes, &mut pos)?;
        if line.is_empty() {
            break;
        }
        let fields: Vec<&str> = line
            .strip_prefix("tensor ")
            .ok_or_else(|| manifest_err(format!("unexpected line {line:?}")))?
            .split(' ')
            .collect();
        let [name, rows, cols, offset] = fields[..] else {
            return Err(manifest_err(format!("bad tensor line {line:?}")));
        };
        let num = |s: &str| s.parse::<usize>().map_err(|_| manifest_err(format!("bad number in {line:?}")));
        registry.push((name.to_owned(), num(rows)?, num(cols)?, num(offset)?));
    }

    let payload = &bytes[pos..];
    let mut expected = 0;
    for (name, rows, cols, offset) in &registry {
        if *offset != expected {
            return Err(manifest_err(format!("tensor {name} at offset {offset}, expected {expected}")));
        }
        expected += 8 * rows * cols;
    }
    if payload.len() != expected {
        return Err(CheckpointError::PayloadLength {
            expected,
            actual: payload.len(),
        });
    }
    let tensors = registry
        .into_iter()
        .map(|(name, rows, cols, offset)| {
            let data = payload[offset..offset + 8 * rows * cols]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            Tensor::from_vec(rows, cols, data)
                .map(|t| (name, t))
                .map_err(|e| manifest_err(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    // The throwaway initialisation only fixes names and shapes.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    Ok(Tagger::new(config, vocab, None, &mut rng)?.with_params(tensors)?)
}

/// Writes atomically: the file appears only once completely written.
pub fn save_model(model: &Tagger, path: &Path) -> Result<(), CheckpointError> {
    let io = |source| CheckpointError::Io {
        path: path.to_owned(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = path.with_extension("partial");
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(&encode_model(model)).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn load_model(path: &Path) -> Result<Tagger, CheckpointError> {
    let bytes = fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.to_owned(),
        source,
    })?;
    decode_model(&bytes)
}
