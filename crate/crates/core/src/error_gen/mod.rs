//! Synthetic error injection: turns clean sentences into
//! (corrupted, clean) training pairs.

mod fusion;
mod keyboard;

use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fusion::{build_fusion_table, FusionTable, RuleClass, DEFAULT_RULES};
pub use keyboard::{keyboard_neighbors, mistype, typed_surface};

use crate::error::{Error, Result};
use crate::preprocess::SyllableSequence;
use crate::vi::{Syllable, ToneStyle};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpWeights {
    pub replace: f64,
    pub delete: f64,
    pub duplicate: f64,
}

impl Default for OpWeights {
    fn default() -> Self {
        OpWeights {
            replace: 0.90,
            delete: 0.05,
            duplicate: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorruptionConfig {
    pub select_rate: f64,
    pub op_weights: OpWeights,
    pub seed: u64,
    #[serde(skip)]
    pub tone_style: ToneStyle,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        CorruptionConfig {
            select_rate: 0.08,
            op_weights: OpWeights::default(),
            seed: 0,
            tone_style: ToneStyle::default(),
        }
    }
}

impl CorruptionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.select_rate) {
            return Err(Error::Config(format!(
                "select_rate must be in [0, 1], got {}",
                self.select_rate
            )));
        }
        let w = self.op_weights;
        if [w.replace, w.delete, w.duplicate]
            .iter()
            .any(|x| x.is_nan() || *x < 0.0)
        {
            return Err(Error::Config("op weights must be non-negative".into()));
        }
        let sum = w.replace + w.delete + w.duplicate;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "op weights must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Replace,
    Delete,
    Duplicate,
}

/// One corrupted syllable of the clean sentence. `produced` is what the
/// corrupted sentence has in its place: one syllable for a replace, none
/// for a delete, two copies for a duplicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub target_index: usize,
    pub op: EditOp,
    pub original: Syllable,
    pub produced: Vec<Syllable>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptionRecord {
    pub source: SyllableSequence,
    pub target: SyllableSequence,
    /// Sorted by `target_index`, at most one per index.
    pub edits: Vec<Edit>,
}

impl CorruptionRecord {
    /// Applies the edits to `target`.
    pub fn replay(&self) -> SyllableSequence {
        replay(&self.target, &self.edits)
    }

    pub fn to_pair(&self) -> ParallelPair {
        ParallelPair {
            text: self.source.join(),
            correct: self.target.join(),
        }
    }
}

pub fn replay(target: &SyllableSequence, edits: &[Edit]) -> SyllableSequence {
    let mut edits = edits.iter().peekable();
    let mut out = Vec::with_capacity(target.len() + 2);
    for (i, s) in target.iter().enumerate() {
        match edits.peek() {
            Some(e) if e.target_index == i => {
                out.extend(e.produced.iter().cloned());
                edits.next();
            }
            _ => out.push(s.clone()),
        }
    }
    SyllableSequence::new(out)
}

/// The RNG for one sentence: the seed picks the key, the sentence index
/// picks the stream, so sentences can be corrupted in any order.
pub fn sentence_rng(seed: u64, sentence_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sentence_index);
    rng
}

/// Corrupts one sentence. Deterministic in (clean, table, cfg, sentence_index).
pub fn corrupt(
    clean: &SyllableSequence,
    table: &FusionTable,
    cfg: &CorruptionConfig,
    sentence_index: u64,
) -> CorruptionRecord {
    let mut rng = sentence_rng(cfg.seed, sentence_index);
    let w = cfg.op_weights;
    let mut out = Vec::with_capacity(clean.len() + 2);
    let mut edits = Vec::new();
    for (i, s) in clean.iter().enumerate() {
        if rng.gen::<f64>() >= cfg.select_rate {
            out.push(s.clone());
            continue;
        }
        let x = rng.gen::<f64>() * (w.replace + w.delete + w.duplicate);
        let (op, produced) = if x < w.replace {
            let cands = table.candidates(s.as_str());
            let new = if cands.is_empty() {
                mistype(s, cfg.tone_style, &mut rng)
            } else {
                cands[rng.gen_range(0..cands.len())].clone()
            };
            (EditOp::Replace, vec![new])
        } else if x < w.replace + w.delete {
            (EditOp::Delete, Vec::new())
        } else {
            (EditOp::Duplicate, vec![s.clone(), s.clone()])
        };
        out.extend(produced.iter().cloned());
        edits.push(Edit {
            target_index: i,
            op,
            original: s.clone(),
            produced,
        });
    }
    CorruptionRecord {
        source: SyllableSequence::new(out),
        target: clean.clone(),
        edits,
    }
}

/// Counts over a set of records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorruptionStats {
    pub syllables: u64,
    pub replace: u64,
    pub delete: u64,
    pub duplicate: u64,
}

impl CorruptionStats {
    pub fn add(&mut self, r: &CorruptionRecord) {
        self.syllables += r.target.len() as u64;
        for e in &r.edits {
            match e.op {
                EditOp::Replace => self.replace += 1,
                EditOp::Delete => self.delete += 1,
                EditOp::Duplicate => self.duplicate += 1,
            }
        }
    }

    pub fn selected(&self) -> u64 {
        self.replace + self.delete + self.duplicate
    }
}

/// One line of a parallel dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelPair {
    pub text: String,
    pub correct: String,
}

/// Reads a JSON Lines parallel dataset. Blank lines are skipped.
pub fn read_pairs(reader: impl BufRead) -> Result<Vec<ParallelPair>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let pair = serde_json::from_str(&line).map_err(|e| Error::Parse {
            what: "parallel dataset",
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(pair);
    }
    Ok(out)
}

pub fn read_pairs_file(path: impl AsRef<Path>) -> Result<Vec<ParallelPair>> {
    let f = std::fs::File::open(path)?;
    read_pairs(std::io::BufReader::new(f))
}

pub fn write_pair(mut w: impl Write, pair: &ParallelPair) -> Result<()> {
    serde_json::to_writer(&mut w, pair)?;
    w.write_all(b"\n")?;
    Ok(())
}

const CHUNK: usize = 4096;

/// Corrupts every non-blank line of a preprocessed corpus and writes one
/// JSON object per pair, in input order. Line `i` (0-based) uses RNG
/// stream `i`. Returns the number of pairs written.
pub fn generate_dataset(
    corpus: impl BufRead,
    table: &FusionTable,
    cfg: &CorruptionConfig,
    mut out: impl Write,
) -> Result<usize> {
    cfg.validate()?;
    let mut count = 0;
    let mut lines = corpus.lines().enumerate();
    loop {
        let mut chunk = Vec::with_capacity(CHUNK);
        for (i, line) in lines.by_ref().take(CHUNK) {
            chunk.push((i as u64, line?));
        }
        if chunk.is_empty() {
            break;
        }
        let encoded: Vec<Option<String>> = chunk
            .par_iter()
            .map(|(i, line)| {
                let clean = SyllableSequence::from_spaced(line);
                if clean.is_empty() {
                    return Ok(None);
                }
                let pair = corrupt(&clean, table, cfg, *i).to_pair();
                Ok(Some(serde_json::to_string(&pair)?))
            })
            .collect::<Result<_>>()?;
        for line in encoded.into_iter().flatten() {
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
            count += 1;
        }
    }
    out.flush()?;
    Ok(count)
}

/// [`generate_dataset`] between files.
pub fn generate_dataset_file(
    corpus: impl AsRef<Path>,
    table: &FusionTable,
    cfg: &CorruptionConfig,
    out: impl AsRef<Path>,
) -> Result<usize> {
    let input = std::io::BufReader::new(std::fs::File::open(corpus)?);
    let output = std::io::BufWriter::new(std::fs::File::create(out)?);
    generate_dataset(input, table, cfg, output)
}

#[cfg(test)]
mod tests;
