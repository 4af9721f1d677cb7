use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::Hyperparams;
use super::tensor::{Matrix, Scalar};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LinearIdx {
    pub w: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct AttnIdx {
    pub q: LinearIdx,
    pub k: LinearIdx,
    pub v: LinearIdx,
    pub o: LinearIdx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct NormIdx {
    pub gamma: usize,
    pub beta: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct FfnIdx {
    pub inner: LinearIdx,
    pub outer: LinearIdx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct EncoderIdx {
    pub attn: AttnIdx,
    pub norm1: NormIdx,
    pub ffn: FfnIdx,
    pub norm2: NormIdx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct DecoderIdx {
    pub self_attn: AttnIdx,
    pub norm1: NormIdx,
    pub cross_attn: AttnIdx,
    pub norm2: NormIdx,
    pub ffn: FfnIdx,
    pub norm3: NormIdx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Glorot,
    Zeros,
    Ones,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: String,
    pub shape: [usize; 2],
    pub init: Init,
}

/// Names, shapes and positions of every parameter tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub specs: Vec<TensorSpec>,
    pub(crate) src_embed: usize,
    pub(crate) trg_embed: usize,
    pub(crate) out: usize,
    pub(crate) encoder: Vec<EncoderIdx>,
    pub(crate) decoder: Vec<DecoderIdx>,
}

struct Builder {
    specs: Vec<TensorSpec>,
}

impl Builder {
    fn push(&mut self, name: String, shape: [usize; 2], init: Init) -> usize {
        self.specs.push(TensorSpec { name, shape, init });
        self.specs.len() - 1
    }

    fn linear(&mut self, prefix: &str, rows: usize, cols: usize) -> LinearIdx {
        LinearIdx {
            w: self.push(format!("{prefix}.w"), [rows, cols], Init::Glorot),
            b: self.push(format!("{prefix}.b"), [1, cols], Init::Zeros),
        }
    }

    fn attn(&mut self, prefix: &str, d: usize) -> AttnIdx {
        AttnIdx {
            q: self.linear(&format!("{prefix}.q"), d, d),
            k: self.linear(&format!("{prefix}.k"), d, d),
            v: self.linear(&format!("{prefix}.v"), d, d),
            o: self.linear(&format!("{prefix}.o"), d, d),
        }
    }

    fn norm(&mut self, prefix: &str, d: usize) -> NormIdx {
        NormIdx {
            gamma: self.push(format!("{prefix}.gamma"), [1, d], Init::Ones),
            beta: self.push(format!("{prefix}.beta"), [1, d], Init::Zeros),
        }
    }

    fn ffn(&mut self, prefix: &str, d: usize) -> FfnIdx {
        FfnIdx {
            inner: self.linear(&format!("{prefix}.inner"), d, 4 * d),
            outer: self.linear(&format!("{prefix}.outer"), 4 * d, d),
        }
    }
}

impl Layout {
    pub fn new(hp: &Hyperparams, vocab_size: usize) -> Layout {
        let d = hp.d_model;
        let mut b = Builder { specs: Vec::new() };
        let src_embed = b.push("embed.src".into(), [d, vocab_size], Init::Glorot);
        let trg_embed = b.push("embed.trg".into(), [d, vocab_size], Init::Glorot);
        let encoder = (0..hp.n_layers)
            .map(|l| {
                let p = format!("encoder.{l}");
                EncoderIdx {
                    attn: b.attn(&format!("{p}.self_attn"), d),
                    norm1: b.norm(&format!("{p}.norm1"), d),
                    ffn: b.ffn(&format!("{p}.ffn"), d),
                    norm2: b.norm(&format!("{p}.norm2"), d),
                }
            })
            .collect();
        let decoder = (0..hp.n_layers)
            .map(|l| {
                let p = format!("decoder.{l}");
                DecoderIdx {
                    self_attn: b.attn(&format!("{p}.self_attn"), d),
                    norm1: b.norm(&format!("{p}.norm1"), d),
                    cross_attn: b.attn(&format!("{p}.cross_attn"), d),
                    norm2: b.norm(&format!("{p}.norm2"), d),
                    ffn: b.ffn(&format!("{p}.ffn"), d),
                    norm3: b.norm(&format!("{p}.norm3"), d),
                }
            })
            .collect();
        let out = b.push("out.w".into(), [d, vocab_size], Init::Glorot);
        Layout {
            specs: b.specs,
            src_embed,
            trg_embed,
            out,
            encoder,
            decoder,
        }
    }

    pub fn zeros<T: Scalar>(&self) -> Vec<Matrix<T>> {
        self.specs
            .iter()
            .map(|s| Matrix::zeros(s.shape[0], s.shape[1]))
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }
}

/// Uniform bound for a `fan_in x fan_out` weight: sqrt(6 / (fan_in + fan_out)).
pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Parameters plus the layout that names them.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    pub hp: Hyperparams,
    pub vocab_size: usize,
    pub layout: Layout,
    pub params: Vec<Matrix<T>>,
}

impl<T: Scalar> Model<T> {
    /// Seeded initialization: Glorot-uniform weights and embeddings, zero
    /// biases, unit layer-norm gains. Tensors are filled in layout order.
    pub fn init(hp: Hyperparams, vocab_size: usize, seed: u64) -> Result<Model<T>> {
        hp.validate()?;
        if vocab_size == 0 {
            return Err(Error::Config("vocabulary size must be positive".into()));
        }
        let layout = Layout::new(&hp, vocab_size);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = layout
            .specs
            .iter()
            .map(|s| {
                let [r, c] = s.shape;
                let data = match s.init {
                    Init::Zeros => vec![T::zero(); r * c],
                    Init::Ones => vec![T::one(); r * c],
                    Init::Glorot => {
                        let bound = glorot_bound(r, c);
                        (0..r * c)
                            .map(|_| T::c(rng.gen_range(-bound..bound)))
                            .collect()
                    }
                };
                Matrix::from_vec(r, c, data)
            })
            .collect();
        Ok(Model {
            hp,
            vocab_size,
            layout,
            params,
        })
    }

    /// Builds a model from loaded tensors, checking every shape.
    pub fn from_params(
        hp: Hyperparams,
        vocab_size: usize,
        params: Vec<Matrix<T>>,
    ) -> Result<Model<T>> {
        hp.validate()?;
        let layout = Layout::new(&hp, vocab_size);
        if params.len() != layout.specs.len() {
            return Err(Error::Format(format!(
                "expected {} tensors, found {}",
                layout.specs.len(),
                params.len()
            )));
        }
        for (spec, p) in layout.specs.iter().zip(&params) {
            if spec.shape != p.shape() {
                return Err(Error::Shape {
                    name: spec.name.clone(),
                    expected: spec.shape,
                    found: p.shape(),
                });
            }
        }
        Ok(Model {
            hp,
            vocab_size,
            layout,
            params,
        })
    }

    pub fn zero_grads(&self) -> Vec<Matrix<T>> {
        self.layout.zeros()
    }

    pub fn param(&self, name: &str) -> Option<&Matrix<T>> {
        self.layout.index_of(name).map(|i| &self.params[i])
    }

    pub fn num_parameters(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(Matrix::all_finite)
    }

    /// Same model in another precision.
    pub fn cast<U: Scalar>(&self) -> Model<U> {
        Model {
            hp: self.hp,
            vocab_size: self.vocab_size,
            layout: self.layout.clone(),
            params: self
                .params
                .iter()
                .map(|p| {
                    let data = p
                        .data
                        .iter()
                        .map(|x| U::c(x.to_f64().unwrap_or(f64::NAN)))
                        .collect();
                    Matrix::from_vec(p.rows, p.cols, data)
                })
                .collect(),
        }
    }
}
