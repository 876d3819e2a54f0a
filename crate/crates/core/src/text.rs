//! Sentence segmentation, tokenization and occurrence vectors.
//!
//! Tokenization rule: lowercase; Unicode letters and digits are token
//! characters; an apostrophe (`'` or `’`, normalized to `'`) is kept only
//! between two token characters; everything else separates tokens.
//!
//! Segmentation is a plain terminator splitter: a sentence ends after `.`,
//! `!` or `?` when followed by whitespace or end of text. Abbreviations are
//! not special-cased.

use crate::model::Vocabulary;

/// Splits `text` into trimmed, non-empty sentences.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            let at_boundary = match chars.peek() {
                None => true,
                Some(&(_, next)) => next.is_whitespace(),
            };
            if at_boundary {
                let end = i + c.len_utf8();
                push_segment(&mut out, &text[start..end]);
                start = end;
            }
        }
    }
    push_segment(&mut out, &text[start..]);
    out
}

fn push_segment(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Lowercased word tokens in order of appearance.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut pending_apostrophe = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if pending_apostrophe {
                current.push('\'');
                pending_apostrophe = false;
            }
            // Some lowercase mappings emit combining marks; drop those so the
            // output re-tokenizes to itself.
            current.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
        } else if is_apostrophe(c) && !current.is_empty() && !pending_apostrophe {
            pending_apostrophe = true;
        } else {
            pending_apostrophe = false;
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Presence bit per vocabulary slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceVector {
    bits: Vec<bool>,
}

impl OccurrenceVector {
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, slot: usize) -> bool {
        self.bits[slot]
    }

    /// Slots that are set, ascending.
    pub fn present(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }
}

pub fn occurrence_vector(unit_text: &str, vocab: &Vocabulary) -> OccurrenceVector {
    let mut bits = vec![false; vocab.len()];
    for slot in present_slots(unit_text, vocab) {
        bits[slot] = true;
    }
    OccurrenceVector { bits }
}

/// Sorted, deduplicated vocabulary slots occurring in `unit_text`.
pub fn present_slots(unit_text: &str, vocab: &Vocabulary) -> Vec<usize> {
    let mut slots: Vec<usize> = tokenize(unit_text)
        .iter()
        .filter_map(|t| vocab.slot(t))
        .collect();
    slots.sort_unstable();
    slots.dedup();
    slots
}
