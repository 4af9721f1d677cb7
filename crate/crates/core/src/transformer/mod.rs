//! Encoder-decoder Transformer trained from scratch on token ids.

mod adam;
mod checkpoint;
mod config;
mod decode;
mod layers;
mod model;
mod params;
mod tensor;
mod train;

pub use adam::{AdamState, BETA1, BETA2, EPSILON};
pub use checkpoint::{Checkpoint, MAGIC, VERSION};
pub use config::{Hyperparams, TrainConfig};
pub use decode::{argmax, Decoded};
pub use layers::positional_encoding;
pub use model::{softmax_f64, truncate};
pub use params::{glorot_bound, Init, Layout, Model, TensorSpec};
pub use tensor::{gemm, Matrix, Scalar, View, ViewMut};
pub use train::{epoch_batches, train_to_file, Dataset, EpochReport, StepLog, Trainer};
