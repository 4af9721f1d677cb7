use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::checkpoint::Checkpoint;
use super::model::truncate;
use super::params::Model;
use crate::error::{Error, Result};
use crate::preprocess::SyllableSequence;
use crate::tokenizer::BpeModel;

/// Batches are formed from windows of this many batches' worth of
/// examples, sorted by length, so that batches hold similar lengths.
const BUCKET_BATCHES: usize = 50;

/// Stream offset separating epoch shuffles from dropout draws.
const SHUFFLE_STREAM: u64 = 1 << 62;

/// Tokenized training pairs: (corrupted source ids, clean target ids).
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub pairs: Vec<(Vec<u32>, Vec<u32>)>,
    /// Sequences cut to `max_seq_len`.
    pub truncated: usize,
}

impl Dataset {
    /// Encodes (source, target) sentences, cutting each to `max_seq_len`.
    pub fn from_pairs(
        pairs: &[(SyllableSequence, SyllableSequence)],
        tokenizer: &BpeModel,
        max_seq_len: usize,
    ) -> Dataset {
        let mut out = Dataset::default();
        for (src, trg) in pairs {
            let mut enc = |s: &SyllableSequence| {
                let (ids, cut) = truncate(&tokenizer.encode(s).ids, max_seq_len);
                out.truncated += cut as usize;
                ids
            };
            let src = enc(src);
            let trg = enc(trg);
            out.pairs.push((src, trg));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub epoch: usize,
    pub step: u64,
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    pub steps: u64,
    /// Mean of the step losses.
    pub mean_loss: f64,
}

/// Batches for one epoch: a seeded shuffle, then length-bucketed batches
/// in shuffled order.
pub fn epoch_batches(
    data: &Dataset,
    batch_size: usize,
    seed: u64,
    epoch: usize,
) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SHUFFLE_STREAM + epoch as u64);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let mut batches = Vec::new();
    for window in order.chunks(batch_size * BUCKET_BATCHES) {
        let mut w = window.to_vec();
        w.sort_by_key(|&i| (data.pairs[i].1.len(), data.pairs[i].0.len()));
        batches.extend(w.chunks(batch_size).map(<[usize]>::to_vec));
    }
    batches.shuffle(&mut rng);
    batches
}

pub struct Trainer {
    pub ckpt: Checkpoint,
    pub data: Dataset,
}

impl Trainer {
    pub fn new(ckpt: Checkpoint, data: Dataset) -> Result<Trainer> {
        if data.is_empty() {
            return Err(Error::InvalidInput("training set is empty".into()));
        }
        Ok(Trainer { ckpt, data })
    }

    pub fn model(&self) -> &Model<f32> {
        &self.ckpt.model
    }

    /// One optimizer step on the given examples. A non-finite loss or
    /// gradient leaves the parameters untouched.
    pub fn step(&mut self, batch: &[usize]) -> Result<f64> {
        let pairs: Vec<(Vec<u32>, Vec<u32>)> =
            batch.iter().map(|&i| self.data.pairs[i].clone()).collect();
        let model = &self.ckpt.model;
        let step = self.ckpt.adam.step;
        let stream = step * model.hp.batch_size as u64;
        let (loss, grads) = model.loss_and_grads(&pairs, Some((self.ckpt.seed, stream)))?;
        if !loss.is_finite() || !grads.iter().all(|g| g.all_finite()) {
            return Err(Error::NonFinite { step: step + 1 });
        }
        let lr = model.hp.learning_rate;
        self.ckpt
            .adam
            .update(&mut self.ckpt.model.params, &grads, lr);
        Ok(loss)
    }

    /// Runs one epoch, or stops early once the optimizer has taken
    /// `step_limit` steps in total.
    pub fn run_epoch(
        &mut self,
        step_limit: Option<u64>,
        mut on_step: impl FnMut(StepLog),
    ) -> Result<EpochReport> {
        let epoch = self.ckpt.epochs + 1;
        let batches = epoch_batches(
            &self.data,
            self.ckpt.model.hp.batch_size,
            self.ckpt.seed,
            epoch,
        );
        let mut total = 0.0;
        let mut steps = 0;
        for batch in &batches {
            if step_limit.is_some_and(|l| self.ckpt.adam.step >= l) {
                break;
            }
            let loss = self.step(batch)?;
            total += loss;
            steps += 1;
            on_step(StepLog {
                epoch,
                step: self.ckpt.adam.step,
                loss,
            });
        }
        self.ckpt.epochs = epoch;
        Ok(EpochReport {
            epoch,
            steps,
            mean_loss: if steps > 0 {
                total / steps as f64
            } else {
                f64::NAN
            },
        })
    }
}

/// Trains for `epochs` epochs, saving the checkpoint to `out` after each
/// one (and once before the first, so `epochs = 0` writes the
/// initialization). A failed step leaves the last saved checkpoint intact.
pub fn train_to_file(
    trainer: &mut Trainer,
    epochs: usize,
    out: &Path,
    mut on_step: impl FnMut(StepLog),
    mut on_epoch: impl FnMut(EpochReport),
) -> Result<()> {
    trainer.ckpt.save(out)?;
    for _ in 0..epochs {
        let report = trainer.run_epoch(None, &mut on_step)?;
        trainer.ckpt.save(out)?;
        on_epoch(report);
    }
    Ok(())
}
