//! Subword (BPE), syllable-level and character-level tokenization.
//!
//! Every syllable ends with the marker `/w`, which BPE may merge into the
//! preceding piece (`ate/w`). Ids 0–3 are reserved for PAD, BOS, EOS and
//! UNK in all modes.

mod bpe;
mod file;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use bpe::MergeTrace;

use crate::preprocess::SyllableSequence;
use crate::vi::Syllable;

pub const EOW: &str = "/w";
pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;
pub const SPECIALS: [&str; 4] = ["<pad>", "<s>", "</s>", "<unk>"];

/// Default stand-in for UNK tokens when decoding.
pub const UNK_PLACEHOLDER: char = '\u{fffd}';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TokenizerMode {
    #[default]
    Bpe,
    Syllable,
    Char,
}

impl FromStr for TokenizerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bpe" => Ok(TokenizerMode::Bpe),
            "syllable" => Ok(TokenizerMode::Syllable),
            "char" => Ok(TokenizerMode::Char),
            other => Err(format!(
                "unknown tokenizer mode `{other}` (bpe|syllable|char)"
            )),
        }
    }
}

impl fmt::Display for TokenizerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenizerMode::Bpe => "bpe",
            TokenizerMode::Syllable => "syllable",
            TokenizerMode::Char => "char",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub rank: usize,
}

impl MergeRule {
    pub fn output(&self) -> String {
        format!("{}{}", self.left, self.right)
    }
}

/// Token ids, framed with BOS/EOS when produced by [`BpeModel::encode`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
}

impl TokenSequence {
    pub fn new(ids: Vec<u32>) -> Self {
        TokenSequence { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// A trained tokenizer: merge rules (BPE mode only) and the vocabulary.
#[derive(Debug, Clone)]
pub struct BpeModel {
    mode: TokenizerMode,
    merges: Vec<MergeRule>,
    tokens: Vec<String>,
    vocab: HashMap<String, u32>,
    // (left id, right id) -> (rank, merged id)
    merge_index: HashMap<(u32, u32), (usize, u32)>,
    eow_id: Option<u32>,
    initial_count: usize,
    unk_placeholder: char,
}

impl PartialEq for BpeModel {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode && self.merges == other.merges && self.tokens == other.tokens
    }
}

impl BpeModel {
    /// Builds the lookup tables from an id-ordered token list.
    fn from_parts(
        mode: TokenizerMode,
        tokens: Vec<String>,
        merges: Vec<MergeRule>,
        initial_count: usize,
    ) -> crate::Result<Self> {
        let vocab: HashMap<String, u32> = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        if vocab.len() != tokens.len() {
            return Err(crate::Error::InvalidInput(
                "tokenizer vocabulary has duplicate tokens".into(),
            ));
        }
        let mut merge_index = HashMap::with_capacity(merges.len());
        for m in &merges {
            let id = |t: &str| {
                vocab.get(t).copied().ok_or_else(|| {
                    crate::Error::InvalidInput(format!(
                        "merge rank {} uses unknown token `{t}`",
                        m.rank
                    ))
                })
            };
            merge_index.insert((id(&m.left)?, id(&m.right)?), (m.rank, id(&m.output())?));
        }
        let eow_id = vocab.get(EOW).copied();
        Ok(BpeModel {
            mode,
            merges,
            tokens,
            vocab,
            merge_index,
            eow_id,
            initial_count,
            unk_placeholder: UNK_PLACEHOLDER,
        })
    }

    pub fn mode(&self) -> TokenizerMode {
        self.mode
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    /// Initial symbols (characters plus the `/w` marker); in syllable mode,
    /// the number of syllable types.
    pub fn initial_count(&self) -> usize {
        self.initial_count
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.vocab.get(token).copied()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn set_unk_placeholder(&mut self, c: char) {
        self.unk_placeholder = c;
    }

    fn char_ids(&self, syllable: &str) -> Vec<u32> {
        let mut buf = [0u8; 4];
        let mut ids: Vec<u32> = syllable
            .chars()
            .map(|c| {
                if c == '/' {
                    return UNK;
                }
                self.id(c.encode_utf8(&mut buf)).unwrap_or(UNK)
            })
            .collect();
        ids.push(self.eow_id.unwrap_or(UNK));
        ids
    }

    /// Ids for one syllable, without BOS/EOS. Also returns the ranks of the
    /// merges applied, in application order.
    pub fn encode_syllable_traced(&self, syllable: &str) -> (Vec<u32>, Vec<usize>) {
        match self.mode {
            TokenizerMode::Syllable => (vec![self.id(syllable).unwrap_or(UNK)], Vec::new()),
            TokenizerMode::Char => (self.char_ids(syllable), Vec::new()),
            TokenizerMode::Bpe => {
                let mut ids = self.char_ids(syllable);
                let mut applied = Vec::new();
                loop {
                    let best = ids
                        .windows(2)
                        .filter_map(|w| self.merge_index.get(&(w[0], w[1])))
                        .min_by_key(|(rank, _)| *rank)
                        .copied();
                    let Some((rank, merged)) = best else {
                        break;
                    };
                    let (left, right) = (
                        self.merges[rank].left.as_str(),
                        self.merges[rank].right.as_str(),
                    );
                    let (l, r) = (self.vocab[left], self.vocab[right]);
                    ids = bpe::merge_pair(&ids, l, r, merged);
                    applied.push(rank);
                }
                (ids, applied)
            }
        }
    }

    /// Token ids for the sequence, framed by BOS and EOS.
    pub fn encode(&self, seq: &SyllableSequence) -> TokenSequence {
        let mut ids = vec![BOS];
        for s in seq {
            ids.extend(self.encode_syllable_traced(s.as_str()).0);
        }
        ids.push(EOS);
        TokenSequence { ids }
    }

    /// Surface strings of the tokens (no framing), e.g. `["ngh", "ành/w"]`.
    pub fn token_strings(&self, seq: &SyllableSequence) -> Vec<String> {
        let ts = self.encode(seq);
        ts.ids[1..ts.ids.len() - 1]
            .iter()
            .map(|&id| self.token(id).unwrap_or(SPECIALS[UNK as usize]).to_string())
            .collect()
    }

    /// Concatenates surfaces and cuts syllables at `/w`. Specials are
    /// dropped; UNK becomes the placeholder character. Out-of-range ids are
    /// treated as UNK.
    pub fn decode(&self, ts: &TokenSequence) -> SyllableSequence {
        let mut out = Vec::new();
        let mut cur = String::new();
        let flush = |cur: &mut String, out: &mut Vec<Syllable>| {
            if let Some(s) = Syllable::new(cur) {
                out.push(s);
            }
            cur.clear();
        };
        for &id in &ts.ids {
            match id {
                PAD | BOS | EOS => continue,
                _ => {}
            }
            let surface = match self.token(id) {
                Some(t) if id != UNK => t,
                _ => {
                    cur.push(self.unk_placeholder);
                    if self.mode == TokenizerMode::Syllable {
                        flush(&mut cur, &mut out);
                    }
                    continue;
                }
            };
            if self.mode == TokenizerMode::Syllable {
                cur.push_str(surface);
                flush(&mut cur, &mut out);
            } else if let Some(stem) = surface.strip_suffix(EOW) {
                cur.push_str(stem);
                flush(&mut cur, &mut out);
            } else {
                cur.push_str(surface);
            }
        }
        flush(&mut cur, &mut out);
        SyllableSequence::new(out)
    }
}

/// Trains a tokenizer in any mode.
///
/// In BPE mode `num_merges` is the merge budget. In syllable mode it caps
/// the number of syllable types kept (0 keeps all); char mode ignores it.
pub fn train<'a>(
    corpus: impl IntoIterator<Item = &'a SyllableSequence>,
    mode: TokenizerMode,
    num_merges: usize,
) -> crate::Result<BpeModel> {
    let freqs = bpe::syllable_frequencies(corpus);
    if freqs.is_empty() {
        return Err(crate::Error::InvalidInput(
            "tokenizer corpus is empty".into(),
        ));
    }
    match mode {
        TokenizerMode::Bpe => Ok(bpe::train_bpe_from_freqs(&freqs, num_merges)?.0),
        TokenizerMode::Char => {
            let alphabet = bpe::alphabet(&freqs);
            let n = alphabet.len();
            let tokens = SPECIALS
                .iter()
                .map(|s| s.to_string())
                .chain(alphabet)
                .collect();
            BpeModel::from_parts(mode, tokens, Vec::new(), n)
        }
        TokenizerMode::Syllable => {
            let mut types: Vec<(&String, &u64)> = freqs.iter().collect();
            types.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
            if num_merges > 0 {
                types.truncate(num_merges);
            }
            let n = types.len();
            let tokens = SPECIALS
                .iter()
                .map(|s| s.to_string())
                .chain(types.into_iter().map(|(s, _)| s.clone()))
                .collect();
            BpeModel::from_parts(mode, tokens, Vec::new(), n)
        }
    }
}

/// Trains BPE with `num_merges` merges (fewer if pairs run out).
pub fn train_bpe<'a>(
    corpus: impl IntoIterator<Item = &'a SyllableSequence>,
    num_merges: usize,
) -> crate::Result<BpeModel> {
    train(corpus, TokenizerMode::Bpe, num_merges)
}

/// Like [`train_bpe`], also returning the per-iteration merge trace.
pub fn train_bpe_traced<'a>(
    corpus: impl IntoIterator<Item = &'a SyllableSequence>,
    num_merges: usize,
) -> crate::Result<(BpeModel, Vec<MergeTrace>)> {
    let freqs = bpe::syllable_frequencies(corpus);
    if freqs.is_empty() {
        return Err(crate::Error::InvalidInput(
            "tokenizer corpus is empty".into(),
        ));
    }
    bpe::train_bpe_from_freqs(&freqs, num_merges)
}

#[cfg(test)]
mod tests;
