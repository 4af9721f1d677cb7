//! Syllable unigram statistics and merged-syllable segmentation.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::grammar::ToneStyle;
use super::telex::standardize_marks;
use crate::error::{Error, Result};

/// Syllable occurrence counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnigramModel {
    counts: HashMap<String, u64>,
    total: u64,
}

impl UnigramModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, syllable: &str, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(syllable.to_string()).or_default() += count;
        self.total += count;
    }

    pub fn count(&self, syllable: &str) -> u64 {
        self.counts.get(syllable).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// count/total for seen syllables; 1/(total·10^len) otherwise, so long
    /// unknown pieces are penalised and every unseen probability stays below
    /// the smallest observed one.
    pub fn probability(&self, syllable: &str) -> f64 {
        10f64.powf(self.log10_probability(syllable))
    }

    pub fn log10_probability(&self, syllable: &str) -> f64 {
        let total = self.total.max(1) as f64;
        match self.counts.get(syllable) {
            Some(&c) => (c as f64).log10() - total.log10(),
            None => -(total.log10() + syllable.chars().count() as f64),
        }
    }

    /// Entries sorted by descending count, then by syllable.
    pub fn entries(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<_> = self.counts.iter().map(|(k, &c)| (k.as_str(), c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        v
    }

    /// Reads `syllable<TAB>count` lines. Blank lines are skipped.
    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut m = UnigramModel::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse = || -> Option<(&str, u64)> {
                let (s, c) = line.split_once('\t')?;
                Some((s, c.trim().parse().ok()?))
            };
            let (s, c) = parse().ok_or_else(|| Error::Parse {
                what: "unigram file",
                line: n + 1,
                msg: format!("expected `syllable<TAB>count`, got {line:?}"),
            })?;
            m.add(s, c);
        }
        Ok(m)
    }

    pub fn write(&self, mut w: impl Write) -> Result<()> {
        for (s, c) in self.entries() {
            writeln!(w, "{s}\t{c}")?;
        }
        Ok(())
    }
}

/// Splits a run of merged syllables (`hômnay`, or telex-merged `homonay`)
/// into the pieces maximising the product of unigram probabilities.
///
/// Each candidate piece is composed as telex before lookup, so `homo`
/// scores as `hôm`. Returned pieces are the composed syllables (or the raw
/// piece when it does not compose). The unsplit token wins ties.
pub fn segment_merged(token: &str, model: &UnigramModel, style: ToneStyle) -> Vec<String> {
    let chars: Vec<char> = token.chars().collect();
    let n = chars.len();
    if n <= 1 {
        return vec![token.to_string()];
    }
    let piece = |i: usize, j: usize| -> (String, f64) {
        let raw: String = chars[i..j].iter().collect();
        let std = standardize_marks(&raw, style);
        let text = if std.standardizable { std.text } else { raw };
        let score = model.log10_probability(&text);
        (text, score)
    };

    // best[j]: best log score of chars[..j]; back[j]: start of its last piece.
    let mut best = vec![f64::NEG_INFINITY; n + 1];
    let mut back = vec![0usize; n + 1];
    best[0] = 0.0;
    for j in 1..=n {
        for i in 0..j {
            let cand = best[i] + piece(i, j).1;
            if cand > best[j] {
                best[j] = cand;
                back[j] = i;
            }
        }
    }
    if back[n] == 0 {
        return vec![token.to_string()];
    }
    let mut pieces = Vec::new();
    let mut j = n;
    while j > 0 {
        let i = back[j];
        pieces.push(piece(i, j).0);
        j = i;
    }
    pieces.reverse();
    pieces
}

/// Log10 score of a particular split, using the same piece scoring as
/// [`segment_merged`]. Pieces are raw substrings of the token.
pub fn split_score(pieces: &[&str], model: &UnigramModel, style: ToneStyle) -> f64 {
    pieces
        .iter()
        .map(|raw| {
            let std = standardize_marks(raw, style);
            let text = if std.standardizable {
                std.text
            } else {
                raw.to_string()
            };
            model.log10_probability(&text)
        })
        .sum()
}
