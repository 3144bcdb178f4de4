/// Default symbol for an aligned position that produces no phoneme.
pub const EMPTY_SYMBOL: &str = "EMPTY";
/// Default symbol joining two phonemes emitted by one grapheme.
pub const JOIN_SYMBOL: &str = "_MYJOIN_";

/// Turns aligned per-grapheme predictions into a space-separated phoneme
/// string: `empty` positions are dropped and `join`ed phonemes are split.
pub fn strip_alignment_symbols<S: AsRef<str>>(pred: &[S], empty: &str, join: &str) -> String {
    let mut phonemes = Vec::new();
    for p in pred {
        let p = p.as_ref();
        if p == empty {
            continue;
        }
        if join.is_empty() {
            phonemes.push(p);
        } else {
            phonemes.extend(p.split(join).filter(|s| !s.is_empty() && *s != empty));
        }
    }
    phonemes.join(" ")
}
