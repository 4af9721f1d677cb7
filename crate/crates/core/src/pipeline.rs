//! Raw sentence in, corrected syllables out: preprocess, tokenize, run
//! the model greedily, detokenize.

use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::error_gen::ParallelPair;
use crate::metrics::{self, MetricsReport};
use crate::preprocess::{Preprocessor, SyllableSequence};
use crate::tokenizer::{BpeModel, TokenSequence, UNK};
use crate::transformer::{truncate, Checkpoint, Model};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    /// The source was cut to `max_seq_len`, or decoding stopped at its
    /// length limit before EOS.
    pub truncated: bool,
    pub empty_input: bool,
    /// The source or the output holds an unknown token.
    pub contains_unk: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionResult {
    pub input: SyllableSequence,
    pub output: SyllableSequence,
    pub flags: Flags,
}

/// Totals from a batch run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BatchCounts {
    pub lines: usize,
    pub changed: usize,
    pub truncated: usize,
    pub empty: usize,
    pub with_unk: usize,
}

/// Longest output allowed for a source of `src_tokens` ids: 1.5 times
/// the source, rounded up.
pub fn max_decode_len(src_tokens: usize) -> usize {
    (3 * src_tokens).div_ceil(2)
}

pub struct Corrector {
    preprocessor: Preprocessor,
    tokenizer: BpeModel,
    model: Model<f32>,
}

impl Corrector {
    /// Refuses a tokenizer whose mode or vocabulary size differs from the
    /// one the checkpoint was trained with.
    pub fn new(
        preprocessor: Preprocessor,
        tokenizer: BpeModel,
        ckpt: Checkpoint,
    ) -> Result<Corrector> {
        if tokenizer.mode() != ckpt.tokenizer_mode {
            return Err(Error::Mismatch(format!(
                "tokenizer mode is {} but the checkpoint was trained with {}",
                tokenizer.mode(),
                ckpt.tokenizer_mode
            )));
        }
        ckpt.check_vocab(tokenizer.vocab_size())?;
        Ok(Corrector {
            preprocessor,
            tokenizer,
            model: ckpt.model,
        })
    }

    pub fn preprocessor(&self) -> &Preprocessor {
        &self.preprocessor
    }

    pub fn tokenizer(&self) -> &BpeModel {
        &self.tokenizer
    }

    pub fn model(&self) -> &Model<f32> {
        &self.model
    }

    pub fn correct(&self, text: &str) -> Result<CorrectionResult> {
        let input = self.preprocessor.preprocess_sentence(text);
        self.correct_sequence(input)
    }

    /// Corrects an already preprocessed sentence.
    pub fn correct_sequence(&self, input: SyllableSequence) -> Result<CorrectionResult> {
        let mut flags = Flags::default();
        if input.is_empty() {
            flags.empty_input = true;
            return Ok(CorrectionResult {
                input,
                output: SyllableSequence::default(),
                flags,
            });
        }
        let ids = self.tokenizer.encode(&input).ids;
        let (src, cut) = truncate(&ids, self.model.hp.max_seq_len);
        let decoded = self.model.greedy_decode(&src, max_decode_len(src.len()))?;
        flags.truncated = cut || decoded.truncated;
        flags.contains_unk = src.contains(&UNK) || decoded.ids.contains(&UNK);
        let output = self.tokenizer.decode(&TokenSequence::new(decoded.ids));
        Ok(CorrectionResult {
            input,
            output,
            flags,
        })
    }

    /// One corrected sentence per input line, in input order. Lines are
    /// processed in parallel.
    pub fn correct_lines(
        &self,
        reader: impl BufRead,
        mut writer: impl Write,
    ) -> Result<BatchCounts> {
        let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
        let results: Vec<CorrectionResult> = lines
            .par_iter()
            .map(|l| self.correct(l))
            .collect::<Result<_>>()?;
        let mut counts = BatchCounts::default();
        for r in &results {
            writeln!(writer, "{}", r.output)?;
            counts.lines += 1;
            counts.changed += (r.output != r.input) as usize;
            counts.truncated += r.flags.truncated as usize;
            counts.empty += r.flags.empty_input as usize;
            counts.with_unk += r.flags.contains_unk as usize;
        }
        writer.flush()?;
        Ok(counts)
    }

    pub fn correct_file(&self, input: &Path, output: &Path) -> Result<BatchCounts> {
        let reader = std::io::BufReader::new(std::fs::File::open(input)?);
        let writer = std::io::BufWriter::new(std::fs::File::create(output)?);
        self.correct_lines(reader, writer)
    }

    /// Corrects the source side of every pair.
    pub fn predict(&self, pairs: &[ParallelPair]) -> Result<Vec<Prediction>> {
        pairs
            .par_iter()
            .map(|p| {
                let r = self.correct(&p.text)?;
                Ok(Prediction {
                    source: r.input,
                    hypothesis: r.output,
                    reference: self.preprocessor.preprocess_sentence(&p.correct),
                })
            })
            .collect()
    }
}

/// Runs both sides of every pair through the preprocessor, the same
/// normalization inference applies to its input.
pub fn training_pairs(
    pairs: &[ParallelPair],
    pre: &Preprocessor,
) -> Vec<(SyllableSequence, SyllableSequence)> {
    pairs
        .par_iter()
        .map(|p| {
            (
                pre.preprocess_sentence(&p.text),
                pre.preprocess_sentence(&p.correct),
            )
        })
        .collect()
}

/// A scored test sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub source: SyllableSequence,
    pub hypothesis: SyllableSequence,
    pub reference: SyllableSequence,
}

pub fn score(predictions: &[Prediction]) -> Result<MetricsReport> {
    let triples: Vec<_> = predictions
        .iter()
        .map(|p| (p.source.clone(), p.hypothesis.clone(), p.reference.clone()))
        .collect();
    metrics::evaluate(&triples)
}

/// One-off correction; builds a [`Corrector`] each call.
pub fn correct(
    text: &str,
    preprocessor: &Preprocessor,
    tokenizer: &BpeModel,
    ckpt: &Checkpoint,
) -> Result<CorrectionResult> {
    Corrector::new(preprocessor.clone(), tokenizer.clone(), ckpt.clone())?.correct(text)
}
