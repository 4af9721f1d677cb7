use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architecture and optimizer settings stored with every checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    pub max_seq_len: usize,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.d_model == 0 || self.n_heads == 0 || self.n_layers == 0 {
            return bad("d_model, n_heads and n_layers must be positive".into());
        }
        if self.d_model % self.n_heads != 0 {
            return bad(format!(
                "d_model {} is not divisible by n_heads {}",
                self.d_model, self.n_heads
            ));
        }
        if self.max_seq_len < 2 {
            return bad("max_seq_len must be at least 2 (BOS and EOS)".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!(
                "dropout_rate must be in [0, 1), got {}",
                self.dropout_rate
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }
}

/// The training config file. Field names follow the usual hyperparameter
/// table; missing fields take the defaults below.
///
/// ```toml
/// embedding_dimension = 512
/// sequence_length = 200
/// num_heads = 8
/// num_layers = 3
/// batch_size = 32
/// learning_rate = 0.0003
/// dropout_rate = 0.1
/// epochs = 5
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub embedding_dimension: usize,
    pub sequence_length: usize,
    pub num_heads: usize,
    pub num_layers: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout_rate: f64,
    pub epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            embedding_dimension: 512,
            sequence_length: 200,
            num_heads: 8,
            num_layers: 3,
            batch_size: 32,
            learning_rate: 0.0003,
            dropout_rate: 0.1,
            epochs: 1,
        }
    }
}

impl TrainConfig {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<TrainConfig> {
        let cfg: TrainConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.hyperparams().validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainConfig> {
        TrainConfig::parse(&std::fs::read_to_string(path)?)
    }

    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            d_model: self.embedding_dimension,
            n_layers: self.num_layers,
            n_heads: self.num_heads,
            max_seq_len: self.sequence_length,
            dropout_rate: self.dropout_rate,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
        }
    }
}
