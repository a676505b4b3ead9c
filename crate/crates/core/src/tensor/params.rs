//! Named parameter store with seeded, order-independent initialization.

use crate::error::TensorError;
use crate::rng::SplitMix64;
use crate::tensor::Tensor;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

/// One named parameter: a weight tensor plus a bias tensor.
///
/// Linear layers store `weight [fan_out, fan_in]` / `bias [fan_out]`;
/// LayerNorm stores `weight = gamma [dim]` / `bias = beta [dim]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Param {
    pub fn fan_in(&self) -> usize {
        match self.weight.dims() {
            [_, c_in] => *c_in,
            [c] => *c,
            _ => 0,
        }
    }

    pub fn fan_out(&self) -> usize {
        match self.weight.dims() {
            [c_out, _] => *c_out,
            [c] => *c,
            _ => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Linear { fan_in: usize, fan_out: usize },
    LayerNorm { dim: usize },
}

/// Declaration of every parameter shape, collected before initialization.
#[derive(Clone, Debug, Default)]
pub struct ParamDecl {
    entries: BTreeMap<String, ParamKind>,
}

impl ParamDecl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn linear(&mut self, path: &str, fan_in: usize, fan_out: usize) -> Result<(), TensorError> {
        self.insert(path, ParamKind::Linear { fan_in, fan_out })
    }

    pub fn layer_norm(&mut self, path: &str, dim: usize) -> Result<(), TensorError> {
        self.insert(path, ParamKind::LayerNorm { dim })
    }

    fn insert(&mut self, path: &str, kind: ParamKind) -> Result<(), TensorError> {
        if self.entries.contains_key(path) {
            return Err(TensorError::DuplicateParam {
                path: path.to_string(),
            });
        }
        self.entries.insert(path.to_string(), kind);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ParamKind)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Immutable-after-init map from parameter path to [`Param`].
#[derive(Clone, Debug)]
pub struct ParamStore {
    params: BTreeMap<String, Param>,
    seed: u64,
}

impl ParamStore {
    /// Initialize every declared parameter.
    ///
    /// Linear weights draw Glorot-uniform values, `a = sqrt(6 / (fan_in +
    /// fan_out))`, from a SplitMix64 stream keyed by `(seed, path)`; biases
    /// are zero. LayerNorm initializes gamma = 1, beta = 0. Because streams
    /// are keyed by path, declaration order never changes values.
    pub fn init(decl: &ParamDecl, seed: u64) -> Self {
        let mut params = BTreeMap::new();
        for (path, kind) in decl.iter() {
            let param = match kind {
                ParamKind::Linear { fan_in, fan_out } => {
                    let a = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
                    let mut rng = SplitMix64::keyed_by_path(seed, path);
                    let data: Vec<f32> = (0..fan_in * fan_out)
                        .map(|_| ((2.0 * rng.next_f64() - 1.0) * a) as f32)
                        .collect();
                    Param {
                        weight: Tensor::new(vec![fan_out, fan_in], data).unwrap(),
                        bias: Tensor::zeros(&[fan_out]),
                    }
                }
                ParamKind::LayerNorm { dim } => Param {
                    weight: Tensor::new(vec![dim], vec![1.0; dim]).unwrap(),
                    bias: Tensor::zeros(&[dim]),
                },
            };
            params.insert(path.to_string(), param);
        }
        Self { params, seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn get(&self, path: &str) -> Result<&Param, TensorError> {
        self.params.get(path).ok_or_else(|| TensorError::MissingParam {
            path: path.to_string(),
        })
    }

    pub fn get_joined(&self, path: &str, leaf: &str) -> Result<&Param, TensorError> {
        self.get(&super::join(path, leaf))
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(|k| k.as_str())
    }

    /// Replace a parameter's values, keeping its shape. Test scaffolding for
    /// identity/zero-weight trace cases.
    pub fn set(&mut self, path: &str, weight: Tensor, bias: Tensor) -> Result<(), TensorError> {
        let slot = self
            .params
            .get_mut(path)
            .ok_or_else(|| TensorError::MissingParam {
                path: path.to_string(),
            })?;
        if weight.len() != slot.weight.len() {
            return Err(TensorError::DataLength {
                expected: slot.weight.len(),
                got: weight.len(),
            });
        }
        if bias.len() != slot.bias.len() {
            return Err(TensorError::DataLength {
                expected: slot.bias.len(),
                got: bias.len(),
            });
        }
        slot.weight = weight;
        slot.bias = bias;
        Ok(())
    }

    /// Zero a parameter's weight and bias.
    pub fn zero_out(&mut self, path: &str) {
        if let Some(p) = self.params.get_mut(path) {
            p.weight.data_mut().fill(0.0);
            p.bias.data_mut().fill(0.0);
        }
    }

    /// Set a square linear parameter to the identity with zero bias.
    pub fn set_identity(&mut self, path: &str) {
        if let Some(p) = self.params.get_mut(path) {
            let dims = p.weight.dims().to_vec();
            if let [rows, cols] = dims[..] {
                let data = p.weight.data_mut();
                data.fill(0.0);
                let n = rows.min(cols);
                for i in 0..n {
                    data[i * cols + i] = 1.0;
                }
            }
            p.bias.data_mut().fill(0.0);
        }
    }
}
