//! Label schemes: BIO validation and repair, argumentation-mining labels and
//! structures, natural subtasks and alignment-symbol stripping.

mod align;
mod am;
mod bio;
mod structure;
mod subtask;

use thiserror::Error;

pub use align::{strip_alignment_symbols, EMPTY_SYMBOL, JOIN_SYMBOL};
pub use am::{parse_am_label, parse_am_sequence, AmAliases, AmLabel, AmType, Stance, BOTTOM};
pub use bio::{
    bio_spans, correct_bio, correct_bio_strings, parse_bio_sequence, validate_bio, validate_bio_strings,
    BioLabel, Prefix, Repair, Violation, ViolationKind,
};
pub use structure::{abs_to_rel, am_postprocess, components_from_labels, components_to_labels, rel_to_abs, ComponentSpan};
pub use subtask::{derive_label, derive_subtask, segmentation_label, Subtask};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("label {index} ({label:?}) is not a BIO label")]
    Bio { index: usize, label: String },
    #[error("malformed AM label {label:?}: {reason}")]
    AmFormat { label: String, reason: String },
    #[error("invalid AM label {label:?}: {reason}")]
    AmInvariant { label: String, reason: &'static str },
    #[error("token {index}: {reason}")]
    Structure { index: usize, reason: String },
    #[error("component over tokens {start}..={end} is heterogeneous; run the AM post-processing first")]
    Heterogeneous { start: usize, end: usize },
    #[error("component {component} links to {target}, outside 0..{count} or to itself")]
    LinkOutOfRange {
        component: usize,
        target: i64,
        count: usize,
    },
    #[error("unknown subtask {0:?} (expected ACS, ACI, ARS or ARI)")]
    UnknownSubtask(String),
}
