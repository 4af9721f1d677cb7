//! Vietnamese syllable machinery: telex conversion, tone-mark
//! standardization, syllable grammar, unigram segmentation and the
//! syllable trie.

mod grammar;
mod letters;
mod telex;
mod trie;
mod unigram;

use std::fmt;

use unicode_normalization::UnicodeNormalization;

pub use grammar::{
    canonical, is_valid_syllable, parts_are_valid, render, split_letters, strip_tones,
    syllable_inventory, tone_position, Parts, ToneStyle, CODAS, INITIALS,
};
pub use letters::{is_vietnamese_letter, is_vowel, split_tone, with_tone, Tone};
pub use telex::{compose, standardize_marks, to_telex, Composition, Standardized, TelexForm};
pub use trie::{merge_separated, Cursor, SyllableTrie};
pub use unigram::{segment_merged, split_score, UnigramModel};

/// One whitespace-free, NFC-normalized, lowercase token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable(String);

impl Syllable {
    /// Normalizes `text` (NFC, lowercase) and checks it is a single
    /// non-empty token without whitespace or control characters.
    pub fn new(text: &str) -> Option<Syllable> {
        let norm: String = text.nfc().collect::<String>().to_lowercase();
        let norm: String = norm.nfc().collect();
        let ok = !norm.is_empty() && !norm.chars().any(|c| c.is_whitespace() || c.is_control());
        ok.then_some(Syllable(norm))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Syllable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Syllable {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Writes the generated inventory, one syllable per line.
pub fn write_inventory(style: ToneStyle, mut w: impl std::io::Write) -> std::io::Result<()> {
    for s in syllable_inventory(style) {
        writeln!(w, "{s}")?;
    }
    Ok(())
}
