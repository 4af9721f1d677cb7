//! Five-step text cleaning: noise removal, lowercasing, tone-mark
//! standardization, merged-syllable splitting and separated-syllable
//! merging. The same pipeline is used for training data, test data and
//! inference input.

use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use unicode_normalization::UnicodeNormalization;

use crate::error::Result;
use crate::vi::{
    is_valid_syllable, merge_separated, segment_merged, standardize_marks, strip_tones,
    syllable_inventory, to_telex, Syllable, SyllableTrie, ToneStyle, UnigramModel,
};

/// Punctuation kept (as standalone tokens) when punctuation is retained.
/// `/` is deliberately absent: it is reserved by the tokenizer's
/// end-of-syllable marker.
pub const DEFAULT_PUNCTUATION: &str = ".,;:!?\"'()-…%";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub keep_punct: bool,
    pub punctuation: String,
    pub tone_style: ToneStyle,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            keep_punct: false,
            punctuation: DEFAULT_PUNCTUATION.to_string(),
            tone_style: ToneStyle::default(),
        }
    }
}

impl PreprocessConfig {
    fn kept_punctuation(&self) -> &str {
        if self.keep_punct {
            &self.punctuation
        } else {
            ""
        }
    }
}

/// A sentence as an ordered list of syllables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SyllableSequence {
    syllables: Vec<Syllable>,
}

impl SyllableSequence {
    pub fn new(syllables: Vec<Syllable>) -> Self {
        SyllableSequence { syllables }
    }

    /// Splits already-clean text on whitespace, without any other processing.
    pub fn from_spaced(text: &str) -> Self {
        SyllableSequence {
            syllables: text.split_whitespace().filter_map(Syllable::new).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Syllable> {
        self.syllables.iter()
    }

    pub fn as_slice(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.syllables
            .iter()
            .map(|s| s.as_str().to_string())
            .collect()
    }

    pub fn join(&self) -> String {
        let parts: Vec<&str> = self.syllables.iter().map(Syllable::as_str).collect();
        parts.join(" ")
    }
}

impl fmt::Display for SyllableSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.join())
    }
}

impl FromIterator<Syllable> for SyllableSequence {
    fn from_iter<I: IntoIterator<Item = Syllable>>(iter: I) -> Self {
        SyllableSequence {
            syllables: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a SyllableSequence {
    type Item = &'a Syllable;
    type IntoIter = std::slice::Iter<'a, Syllable>;

    fn into_iter(self) -> Self::IntoIter {
        self.syllables.iter()
    }
}

/// Step 1. Drops emoji, symbols and control characters, turns line
/// breaks into spaces and collapses whitespace. Letters, digits and
/// the characters in `punctuation` survive.
pub fn remove_noise(text: &str, punctuation: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.nfc() {
        let keep = c.is_alphabetic() || c.is_numeric() || punctuation.contains(c);
        if keep {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else if c.is_whitespace() || !is_invisible(c) {
            // Visible noise (emoji, symbols) separates like a space would.
            pending_space = true;
        }
    }
    out
}

// Control and zero-width formatting characters vanish without splitting.
fn is_invisible(c: char) -> bool {
    c.is_control()
        || matches!(c, '\u{200b}'..='\u{200f}' | '\u{2060}'..='\u{2064}' | '\u{feff}' | '\u{ad}')
        || ('\u{0300}'..='\u{036f}').contains(&c)
}

/// Step 2. Unicode lowercasing, re-normalized to NFC.
pub fn lowercase(text: &str) -> String {
    text.to_lowercase().nfc().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokenKind {
    Letters,
    Digits,
    Other,
}

fn kind(c: char) -> TokenKind {
    if c.is_alphabetic() {
        TokenKind::Letters
    } else if c.is_numeric() {
        TokenKind::Digits
    } else {
        TokenKind::Other
    }
}

/// Splits on spaces, then separates letter runs, digit runs and single
/// punctuation characters into their own tokens.
fn split_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut cur = String::new();
        let mut cur_kind = None;
        for c in word.chars() {
            let k = kind(c);
            if cur_kind != Some(k) || k == TokenKind::Other {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                cur_kind = Some(k);
            }
            cur.push(c);
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}

fn is_letter_token(t: &str) -> bool {
    t.chars().next().is_some_and(char::is_alphabetic)
}

/// Step 3 for one token: telex round trip with canonical tone placement.
/// Tokens that do not compose to a valid syllable, or whose letters would
/// change, are left alone.
pub fn standardize_token(token: &str, style: ToneStyle) -> String {
    if !is_letter_token(token) {
        return token.to_string();
    }
    let std = standardize_marks(to_telex(token).as_str(), style);
    if !std.standardizable {
        return token.to_string();
    }
    let same_letters = match (strip_tones(token), strip_tones(&std.text)) {
        (Some((a, _)), Some((b, _))) => a == b,
        _ => false,
    };
    if same_letters {
        std.text
    } else {
        token.to_string()
    }
}

/// Runs the five steps in order over single sentences.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    config: PreprocessConfig,
    unigram: UnigramModel,
    trie: SyllableTrie,
}

impl Preprocessor {
    /// The trie for step 5 is built from the generated syllable inventory;
    /// `unigram` drives step 4 (an empty model disables splitting).
    pub fn new(config: PreprocessConfig, unigram: UnigramModel) -> Self {
        let trie = syllable_inventory(config.tone_style).into_iter().collect();
        Preprocessor {
            config,
            unigram,
            trie,
        }
    }

    pub fn config(&self) -> &PreprocessConfig {
        &self.config
    }

    pub fn unigram(&self) -> &UnigramModel {
        &self.unigram
    }

    /// Steps 1–3: the tokens before any splitting or merging.
    pub fn standardized_tokens(&self, text: &str) -> Vec<String> {
        let clean = remove_noise(text, self.config.kept_punctuation());
        let lower = lowercase(&clean);
        split_tokens(&lower)
            .into_iter()
            .map(|t| standardize_token(&t, self.config.tone_style))
            .collect()
    }

    pub fn preprocess_sentence(&self, text: &str) -> SyllableSequence {
        let style = self.config.tone_style;
        let tokens = self.standardized_tokens(text);

        let mut split = Vec::with_capacity(tokens.len());
        for t in tokens {
            if is_letter_token(&t) && !is_valid_syllable(&t) {
                split.extend(segment_merged(&t, &self.unigram, style));
            } else {
                split.push(t);
            }
        }

        merge_separated(&split, &self.trie)
            .iter()
            .filter_map(|t| Syllable::new(t))
            .collect()
    }

    /// Preprocesses every line of `reader` into `writer`, one sentence per
    /// line, preserving the line count. Returns the number of lines.
    pub fn preprocess_corpus(&self, reader: impl BufRead, mut writer: impl Write) -> Result<usize> {
        let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
        let out: Vec<String> = lines
            .par_iter()
            .map(|l| self.preprocess_sentence(l).join())
            .collect();
        for l in &out {
            writeln!(writer, "{l}")?;
        }
        Ok(out.len())
    }
}

/// Counts valid syllables after steps 1–3, the statistics step 4 needs.
pub fn count_unigrams<'a>(
    lines: impl IntoIterator<Item = &'a str>,
    config: &PreprocessConfig,
) -> UnigramModel {
    let bare = Preprocessor {
        config: config.clone(),
        unigram: UnigramModel::new(),
        trie: SyllableTrie::new(),
    };
    let mut model = UnigramModel::new();
    for line in lines {
        for t in bare.standardized_tokens(line) {
            if is_valid_syllable(&t) {
                model.add(&t, 1);
            }
        }
    }
    model
}
