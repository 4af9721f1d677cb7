//! Vietnamese spelling correction with a from-scratch Transformer.
//!
//! Raw text goes through [`preprocess`], is tokenized by [`tokenizer`],
//! corrected by the encoder-decoder in [`transformer`] and scored with
//! [`metrics`]. Training pairs come from [`error_gen`]; [`pipeline`] glues
//! the inference path together.

pub mod error;
pub mod error_gen;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod tokenizer;
pub mod transformer;
pub mod vi;

pub use error::{Error, Result};
