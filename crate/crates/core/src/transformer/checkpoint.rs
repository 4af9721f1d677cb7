//! Binary checkpoint:
//!
//! ```text
//! "VSEC" | version: u32 LE | header length: u64 LE | JSON header | f32 LE payloads
//! ```
//!
//! The header lists every tensor (model parameters, then Adam first and
//! second moments) with its shape and byte offset into the payload.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::config::Hyperparams;
use super::params::{Layout, Model};
use super::tensor::Matrix;
use crate::error::{Error, Result};
use crate::tokenizer::TokenizerMode;

pub const MAGIC: &[u8; 4] = b"VSEC";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorEntry {
    name: String,
    shape: [usize; 2],
    offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdamHeader {
    step: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    hyperparams: Hyperparams,
    vocab_size: usize,
    tokenizer_mode: String,
    seed: u64,
    epochs: usize,
    adam: AdamHeader,
    tensors: Vec<TensorEntry>,
}

/// Everything needed to resume training or run inference.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model<f32>,
    pub adam: AdamState<f32>,
    pub tokenizer_mode: TokenizerMode,
    pub seed: u64,
    /// Completed training epochs.
    pub epochs: usize,
}

fn tensor_names(layout: &Layout) -> Vec<(String, [usize; 2])> {
    let base = layout.specs.iter().map(|s| (s.name.clone(), s.shape));
    let m = layout
        .specs
        .iter()
        .map(|s| (format!("adam.m.{}", s.name), s.shape));
    let v = layout
        .specs
        .iter()
        .map(|s| (format!("adam.v.{}", s.name), s.shape));
    base.chain(m).chain(v).collect()
}

impl Checkpoint {
    pub fn new(model: Model<f32>, tokenizer_mode: TokenizerMode, seed: u64) -> Checkpoint {
        let adam = AdamState::new(&model.params);
        Checkpoint {
            model,
            adam,
            tokenizer_mode,
            seed,
            epochs: 0,
        }
    }

    fn tensors(&self) -> impl Iterator<Item = &Matrix<f32>> {
        self.model
            .params
            .iter()
            .chain(&self.adam.m)
            .chain(&self.adam.v)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut offset = 0u64;
        let mut entries = Vec::new();
        for ((name, _), t) in tensor_names(&self.model.layout)
            .into_iter()
            .zip(self.tensors())
        {
            entries.push(TensorEntry {
                name,
                shape: t.shape(),
                offset,
            });
            offset += 4 * t.data.len() as u64;
        }
        let header = Header {
            hyperparams: self.model.hp,
            vocab_size: self.model.vocab_size,
            tokenizer_mode: self.tokenizer_mode.to_string(),
            seed: self.seed,
            epochs: self.epochs,
            adam: AdamHeader {
                step: self.adam.step,
                beta1: self.adam.beta1,
                beta2: self.adam.beta2,
                eps: self.adam.eps,
            },
            tensors: entries,
        };
        let json = serde_json::to_vec(&header)?;
        let mut out = Vec::with_capacity(16 + json.len() + offset as usize);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for t in self.tensors() {
            for x in &t.data {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(Error::Format(
                "bad magic bytes, not a vsec checkpoint".into(),
            ));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {version} (expected {VERSION})"
            )));
        }
        let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        let payload_start = 16usize
            .checked_add(hlen)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| Error::Format("truncated header".into()))?;
        let header: Header = serde_json::from_slice(&bytes[16..payload_start])
            .map_err(|e| Error::Format(format!("bad header: {e}")))?;
        let payload = &bytes[payload_start..];

        let tokenizer_mode = header
            .tokenizer_mode
            .parse::<TokenizerMode>()
            .map_err(Error::Format)?;
        header.hyperparams.validate()?;
        let layout = Layout::new(&header.hyperparams, header.vocab_size);
        let expected = tensor_names(&layout);
        if header.tensors.len() != expected.len() {
            return Err(Error::Format(format!(
                "manifest lists {} tensors, expected {}",
                header.tensors.len(),
                expected.len()
            )));
        }
        let mut tensors = Vec::with_capacity(expected.len());
        let mut offset = 0u64;
        for (entry, (name, shape)) in header.tensors.iter().zip(&expected) {
            if &entry.name != name {
                return Err(Error::Format(format!(
                    "manifest has tensor `{}` where `{name}` was expected",
                    entry.name
                )));
            }
            if entry.shape != *shape {
                return Err(Error::Shape {
                    name: name.clone(),
                    expected: *shape,
                    found: entry.shape,
                });
            }
            if entry.offset != offset {
                return Err(Error::Format(format!("tensor `{name}` has a bad offset")));
            }
            let n = shape[0] * shape[1];
            let start = offset as usize;
            let end = start + 4 * n;
            let raw = payload
                .get(start..end)
                .ok_or_else(|| Error::Format(format!("truncated payload in tensor `{name}`")))?;
            let data = raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
                .collect();
            tensors.push(Matrix::from_vec(shape[0], shape[1], data));
            offset = end as u64;
        }
        if offset as usize != payload.len() {
            return Err(Error::Format("trailing bytes after the last tensor".into()));
        }

        let n = layout.specs.len();
        let v = tensors.split_off(2 * n);
        let m = tensors.split_off(n);
        let model = Model::from_params(header.hyperparams, header.vocab_size, tensors)?;
        let adam = AdamState {
            step: header.adam.step,
            beta1: header.adam.beta1,
            beta2: header.adam.beta2,
            eps: header.adam.eps,
            m,
            v,
        };
        Ok(Checkpoint {
            model,
            adam,
            tokenizer_mode,
            seed: header.seed,
            epochs: header.epochs,
        })
    }

    /// Writes to a temporary file next to `path`, then renames, so a crash
    /// never leaves a half-written checkpoint behind.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.to_bytes()?;
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
        Checkpoint::from_bytes(&std::fs::read(path)?)
    }

    /// Fails with a shape error naming the source embedding when the
    /// checkpoint was trained with a different vocabulary size.
    pub fn check_vocab(&self, vocab_size: usize) -> Result<()> {
        if self.model.vocab_size != vocab_size {
            return Err(Error::Shape {
                name: "embed.src".into(),
                expected: [self.model.hp.d_model, vocab_size],
                found: [self.model.hp.d_model, self.model.vocab_size],
            });
        }
        Ok(())
    }
}
