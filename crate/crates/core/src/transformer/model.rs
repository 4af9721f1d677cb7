use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::layers::*;
use super::params::Model;
use super::tensor::{gemm, Matrix, Scalar};
use crate::error::{Error, Result};
use crate::tokenizer::{EOS, PAD};

/// Sequences handled per gradient accumulator. Fixed so that the
/// reduction order, and so the result, does not depend on thread count.
const GRAD_CHUNK: usize = 4;

/// Cuts `ids` to at most `max` tokens, keeping a final EOS. Returns whether
/// anything was dropped.
pub fn truncate(ids: &[u32], max: usize) -> (Vec<u32>, bool) {
    if ids.len() <= max {
        return (ids.to_vec(), false);
    }
    let mut out = ids[..max].to_vec();
    if ids.last() == Some(&EOS) && max > 0 {
        out[max - 1] = EOS;
    }
    (out, true)
}

fn pad_mask(ids: &[u32]) -> Vec<bool> {
    ids.iter().map(|&id| id == PAD).collect()
}

struct EncoderPass<T> {
    h: Matrix<T>,
    drop: Option<Vec<T>>,
    layers: Vec<EncoderCache<T>>,
}

struct DecoderPass<T> {
    y: Matrix<T>,
    drop: Option<Vec<T>>,
    layers: Vec<DecoderCache<T>>,
}

impl<T: Scalar> Model<T> {
    fn check_ids(&self, ids: &[u32]) -> Result<()> {
        if let Some(&bad) = ids.iter().find(|&&id| id as usize >= self.vocab_size) {
            return Err(Error::InvalidInput(format!(
                "token id {bad} outside vocabulary of {}",
                self.vocab_size
            )));
        }
        if ids.len() > self.hp.max_seq_len {
            return Err(Error::InvalidInput(format!(
                "sequence of {} tokens exceeds max_seq_len {}",
                ids.len(),
                self.hp.max_seq_len
            )));
        }
        Ok(())
    }

    fn encoder_pass(&self, src: &[u32], mut rng: Option<&mut ChaCha8Rng>) -> EncoderPass<T> {
        let p = &self.params;
        let mask = pad_mask(src);
        let mut x = embed_fwd(&p[self.layout.src_embed], src);
        let drop = dropout_fwd(&mut x, self.hp.dropout_rate, rng.as_deref_mut());
        let mut layers = Vec::with_capacity(self.layout.encoder.len());
        for idx in &self.layout.encoder {
            let (y, c) = encoder_fwd(
                p,
                idx,
                self.hp.n_heads,
                self.hp.dropout_rate,
                &x,
                &mask,
                rng.as_deref_mut(),
            );
            x = y;
            layers.push(c);
        }
        EncoderPass { h: x, drop, layers }
    }

    fn decoder_pass(
        &self,
        trg_in: &[u32],
        memory: &Matrix<T>,
        memory_mask: &[bool],
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> DecoderPass<T> {
        let p = &self.params;
        let mut y = embed_fwd(&p[self.layout.trg_embed], trg_in);
        let drop = dropout_fwd(&mut y, self.hp.dropout_rate, rng.as_deref_mut());
        let mut layers = Vec::with_capacity(self.layout.decoder.len());
        for idx in &self.layout.decoder {
            let (out, c) = decoder_fwd(
                p,
                idx,
                self.hp.n_heads,
                self.hp.dropout_rate,
                &y,
                memory,
                memory_mask,
                rng.as_deref_mut(),
            );
            y = out;
            layers.push(c);
        }
        DecoderPass { y, drop, layers }
    }

    /// Encoder hidden states (n x d), dropout off.
    pub fn encode(&self, src: &[u32]) -> Result<Matrix<T>> {
        self.check_ids(src)?;
        Ok(self.encoder_pass(src, None).h)
    }

    fn decoder_hidden(&self, prefix: &[u32], src: &[u32], memory: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_ids(prefix)?;
        if prefix.is_empty() {
            return Err(Error::InvalidInput("decoder prefix is empty".into()));
        }
        if src.len() != memory.rows {
            return Err(Error::InvalidInput(
                "encoder states do not match the source".into(),
            ));
        }
        Ok(self.decoder_pass(prefix, memory, &pad_mask(src), None).y)
    }

    /// Decoder output logits (t x |V|) for every prefix position.
    pub fn decoder_logits(
        &self,
        prefix: &[u32],
        src: &[u32],
        memory: &Matrix<T>,
    ) -> Result<Matrix<T>> {
        let y = self.decoder_hidden(prefix, src, memory)?;
        Ok(y.matmul(&self.params[self.layout.out]))
    }

    /// Next-token distribution after `prefix`.
    pub fn decode_step(&self, prefix: &[u32], src: &[u32], memory: &Matrix<T>) -> Result<Vec<f64>> {
        let y = self.decoder_hidden(prefix, src, memory)?;
        let last = Matrix::from_vec(1, y.cols, y.row(y.rows - 1).to_vec());
        let logits = last.matmul(&self.params[self.layout.out]);
        Ok(softmax_f64(&logits.data))
    }

    /// Sum of token cross-entropies for one pair; adds `weight` times its
    /// gradient into `grads`. Returns the summed loss and the number of
    /// target tokens.
    fn pair_loss(
        &self,
        src: &[u32],
        trg: &[u32],
        weight: T,
        grads: &mut [Matrix<T>],
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> (f64, usize) {
        let p = &self.params;
        let (trg_in, targets) = (&trg[..trg.len() - 1], &trg[1..]);
        let src_mask = pad_mask(src);
        let enc = self.encoder_pass(src, rng.as_deref_mut());
        let dec = self.decoder_pass(trg_in, &enc.h, &src_mask, rng.as_deref_mut());
        let w = &p[self.layout.out];
        let mut dlogits = dec.y.matmul(w);

        let mut loss = 0.0;
        let mut count = 0;
        for (i, &target) in targets.iter().enumerate() {
            let row = dlogits.row_mut(i);
            let probs = softmax_f64(row);
            if target == PAD {
                row.iter_mut().for_each(|x| *x = T::zero());
                continue;
            }
            loss -= probs[target as usize].max(f64::MIN_POSITIVE).ln();
            count += 1;
            for (x, &pr) in row.iter_mut().zip(&probs) {
                *x = T::c(pr) * weight;
            }
            row[target as usize] = row[target as usize] - weight;
        }

        let out = self.layout.out;
        gemm(
            T::one(),
            dec.y.view().t(),
            dlogits.view(),
            T::one(),
            grads[out].view_mut(),
        );
        let mut dy = Matrix::zeros(dec.y.rows, dec.y.cols);
        gemm(
            T::one(),
            dlogits.view(),
            w.view().t(),
            T::zero(),
            dy.view_mut(),
        );

        let heads = self.hp.n_heads;
        let mut dmem = Matrix::zeros(enc.h.rows, enc.h.cols);
        for (idx, cache) in self.layout.decoder.iter().zip(&dec.layers).rev() {
            let (d_in, d_m) = decoder_bwd(p, grads, idx, heads, cache, &dy);
            dy = d_in;
            dmem.add_assign(&d_m);
        }
        dropout_bwd(&mut dy, &dec.drop);
        embed_bwd(&mut grads[self.layout.trg_embed], trg_in, &dy);

        let mut dx = dmem;
        for (idx, cache) in self.layout.encoder.iter().zip(&enc.layers).rev() {
            dx = encoder_bwd(p, grads, idx, heads, cache, &dx);
        }
        dropout_bwd(&mut dx, &enc.drop);
        embed_bwd(&mut grads[self.layout.src_embed], src, &dx);
        (loss, count)
    }

    /// Mean token cross-entropy over the batch (PAD targets excluded) and
    /// its gradient. With `dropout = Some((seed, first_stream))`, dropout
    /// is active and sequence `i` draws from stream `first_stream + i`.
    pub fn loss_and_grads(
        &self,
        batch: &[(Vec<u32>, Vec<u32>)],
        dropout: Option<(u64, u64)>,
    ) -> Result<(f64, Vec<Matrix<T>>)> {
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        for (src, trg) in batch {
            self.check_ids(src)?;
            self.check_ids(trg)?;
            if trg.len() < 2 {
                return Err(Error::InvalidInput(
                    "target needs at least BOS and one token".into(),
                ));
            }
        }
        let total: usize = batch
            .iter()
            .map(|(_, t)| t[1..].iter().filter(|&&id| id != PAD).count())
            .sum();
        if total == 0 {
            return Err(Error::InvalidInput("batch has no target tokens".into()));
        }
        let weight = T::c(1.0 / total as f64);

        let parts: Vec<(f64, Vec<Matrix<T>>)> = batch
            .par_chunks(GRAD_CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut g = self.zero_grads();
                let mut loss = 0.0;
                for (j, (src, trg)) in chunk.iter().enumerate() {
                    let mut rng = dropout.map(|(seed, base)| {
                        let mut r = ChaCha8Rng::seed_from_u64(seed);
                        r.set_stream(base + (c * GRAD_CHUNK + j) as u64);
                        r
                    });
                    loss += self.pair_loss(src, trg, weight, &mut g, rng.as_mut()).0;
                }
                (loss, g)
            })
            .collect();

        let mut parts = parts.into_iter();
        let (mut loss, mut grads) = parts.next().expect("non-empty batch");
        for (l, g) in parts {
            loss += l;
            for (a, b) in grads.iter_mut().zip(&g) {
                a.add_assign(b);
            }
        }
        Ok((loss / total as f64, grads))
    }

    /// Loss only, dropout off.
    pub fn loss(&self, batch: &[(Vec<u32>, Vec<u32>)]) -> Result<f64> {
        Ok(self.loss_and_grads(batch, None)?.0)
    }
}

/// Softmax computed in f64; sums to 1 up to f64 rounding.
pub fn softmax_f64<T: Scalar>(logits: &[T]) -> Vec<f64> {
    let xs: Vec<f64> = logits
        .iter()
        .map(|x| x.to_f64().unwrap_or(f64::NAN))
        .collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
