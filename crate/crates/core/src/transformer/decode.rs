use super::params::Model;
use super::tensor::Scalar;
use crate::error::Result;
use crate::tokenizer::{BOS, EOS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    /// Starts with BOS; ends with EOS unless `truncated`.
    pub ids: Vec<u32>,
    /// Stopped at `max_len` before producing EOS.
    pub truncated: bool,
}

/// Index of the largest probability; the lowest id wins ties.
pub fn argmax(probs: &[f64]) -> u32 {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best as u32
}

impl<T: Scalar> Model<T> {
    /// Greedy decoding: appends the most likely token until EOS or until
    /// `max_len` tokens have been generated (BOS not counted). The prefix
    /// also never grows past `max_seq_len`.
    pub fn greedy_decode(&self, src: &[u32], max_len: usize) -> Result<Decoded> {
        let memory = self.encode(src)?;
        let mut ids = vec![BOS];
        let limit = max_len.min(self.hp.max_seq_len.saturating_sub(1));
        for _ in 0..limit {
            let probs = self.decode_step(&ids, src, &memory)?;
            let next = argmax(&probs);
            ids.push(next);
            if next == EOS {
                return Ok(Decoded {
                    ids,
                    truncated: false,
                });
            }
        }
        Ok(Decoded {
            ids,
            truncated: true,
        })
    }
}
