//! Minimal dense-tensor substrate: row-major f32 tensors plus the handful of
//! ops the fusion blocks need (linear maps, activations, softmax, pooling,
//! bilinear sampling, LayerNorm/FFN).
//!
//! Compute is 32-bit with 64-bit accumulators for reductions; tests pit every
//! op against independent 64-bit oracles.

mod params;

pub mod jvp;

pub use params::{Param, ParamDecl, ParamKind, ParamStore};

use crate::error::TensorError;
use alloc::vec;
use alloc::vec::Vec;

/// Largest f32 strictly below 1, used to keep sigmoid outputs in (0, 1).
const ONE_BELOW_1F: f32 = 1.0 - f32::EPSILON / 2.0;

/// Dense row-major f32 tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self, TensorError> {
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(TensorError::DataLength {
                expected,
                got: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn scalar(v: f32) -> Self {
        Self {
            dims: vec![1],
            data: vec![v],
        }
    }

    pub fn from_vec(data: Vec<f32>) -> Self {
        Self {
            dims: vec![data.len()],
            data,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }

    pub fn at(&self, idx: &[usize]) -> f32 {
        debug_assert_eq!(idx.len(), self.dims.len());
        let strides = self.strides();
        let flat: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        self.data[flat]
    }

    /// Reinterpret the data with new dims of identical product.
    pub fn reshape(mut self, dims: Vec<usize>) -> Result<Self, TensorError> {
        let expected: usize = dims.iter().product();
        if expected != self.data.len() {
            return Err(TensorError::DataLength {
                expected,
                got: self.data.len(),
            });
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Trailing dimension, 0 for rank-0.
    pub fn trailing(&self) -> usize {
        self.dims.last().copied().unwrap_or(0)
    }
}

/// y = x W^T + b along the trailing dim, broadcast over leading dims.
///
/// `param.weight` is `[c_out, c_in]`, `param.bias` is `[c_out]`.
pub fn linear(x: &Tensor, param: &Param) -> Result<Tensor, TensorError> {
    let c_in = param.fan_in();
    let c_out = param.fan_out();
    if x.trailing() != c_in {
        return Err(TensorError::ShapeMismatch {
            context: "linear fan-in",
            expected: c_in,
            got: x.trailing(),
        });
    }
    let rows = x.len() / c_in.max(1);
    let mut out_dims = x.dims.clone();
    *out_dims.last_mut().unwrap() = c_out;
    let mut out = vec![0.0f32; rows * c_out];
    let w = param.weight.data();
    let b = param.bias.data();
    for r in 0..rows {
        let xin = &x.data[r * c_in..(r + 1) * c_in];
        let yout = &mut out[r * c_out..(r + 1) * c_out];
        for (o, y) in yout.iter_mut().enumerate() {
            let wrow = &w[o * c_in..(o + 1) * c_in];
            let mut acc = b[o] as f64;
            for (xv, wv) in xin.iter().zip(wrow) {
                acc += *xv as f64 * *wv as f64;
            }
            *y = acc as f32;
        }
    }
    Tensor::new(out_dims, out)
}

/// Elementwise max(0, x).
pub fn relu(x: &Tensor) -> Tensor {
    let data = x.data.iter().map(|&v| v.max(0.0)).collect();
    Tensor {
        dims: x.dims.clone(),
        data,
    }
}

/// Elementwise logistic, clamped into the open interval (0, 1).
pub fn sigmoid(x: &Tensor) -> Tensor {
    let data = x.data.iter().map(|&v| sigmoid_scalar(v)).collect();
    Tensor {
        dims: x.dims.clone(),
        data,
    }
}

pub fn sigmoid_scalar(x: f32) -> f32 {
    let s = (1.0 / (1.0 + libm::exp(-(x as f64)))) as f32;
    s.clamp(f32::MIN_POSITIVE, ONE_BELOW_1F)
}

/// Softmax jointly over `axes`; every slice over the remaining axes sums to 1.
///
/// Stable via max-subtraction; the slice sum accumulates in f64.
pub fn softmax_over(x: &Tensor, axes: &[usize]) -> Result<Tensor, TensorError> {
    if axes.is_empty() {
        return Err(TensorError::NoAxes);
    }
    let rank = x.rank();
    let mut is_axis = vec![false; rank];
    for &a in axes {
        if a >= rank {
            return Err(TensorError::InvalidAxis { axis: a, rank });
        }
        if x.dims[a] == 0 {
            return Err(TensorError::EmptyAxis { axis: a });
        }
        is_axis[a] = true;
    }
    let strides = x.strides();
    let inner_dims: Vec<usize> = (0..rank).filter(|&d| is_axis[d]).collect();
    let outer_dims: Vec<usize> = (0..rank).filter(|&d| !is_axis[d]).collect();
    let inner_count: usize = inner_dims.iter().map(|&d| x.dims[d]).product();
    let outer_count: usize = outer_dims.iter().map(|&d| x.dims[d]).product();

    // Precompute flat offsets of every inner position within a slice.
    let mut inner_offsets = Vec::with_capacity(inner_count);
    let mut idx = vec![0usize; inner_dims.len()];
    loop {
        let off: usize = idx
            .iter()
            .zip(&inner_dims)
            .map(|(i, &d)| i * strides[d])
            .sum();
        inner_offsets.push(off);
        if !increment(&mut idx, &inner_dims, &x.dims) {
            break;
        }
    }

    let mut out = x.data.clone();
    let mut oidx = vec![0usize; outer_dims.len()];
    for _ in 0..outer_count {
        let base: usize = oidx
            .iter()
            .zip(&outer_dims)
            .map(|(i, &d)| i * strides[d])
            .sum();
        let mut mx = f32::NEG_INFINITY;
        for &off in &inner_offsets {
            mx = mx.max(x.data[base + off]);
        }
        let mut sum = 0.0f64;
        for &off in &inner_offsets {
            let e = libm::expf(x.data[base + off] - mx);
            out[base + off] = e;
            sum += e as f64;
        }
        for &off in &inner_offsets {
            out[base + off] = (out[base + off] as f64 / sum) as f32;
        }
        increment(&mut oidx, &outer_dims, &x.dims);
    }
    Tensor::new(x.dims.clone(), out)
}

fn increment(idx: &mut [usize], dims: &[usize], extents: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < extents[dims[k]] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

/// Removes `axis`, each output entry the max over that axis.
pub fn max_pool_axis(x: &Tensor, axis: usize) -> Result<Tensor, TensorError> {
    let rank = x.rank();
    if axis >= rank {
        return Err(TensorError::InvalidAxis { axis, rank });
    }
    let extent = x.dims[axis];
    if extent == 0 {
        return Err(TensorError::EmptyAxis { axis });
    }
    let strides = x.strides();
    let out_dims: Vec<usize> = x
        .dims
        .iter()
        .enumerate()
        .filter(|&(d, _)| d != axis)
        .map(|(_, &e)| e)
        .collect();
    let out_count: usize = out_dims.iter().product();
    let kept: Vec<usize> = (0..rank).filter(|&d| d != axis).collect();
    let mut out = vec![f32::NEG_INFINITY; out_count.max(1)];
    let mut idx = vec![0usize; kept.len()];
    for slot in out.iter_mut() {
        let base: usize = idx
            .iter()
            .zip(&kept)
            .map(|(i, &d)| i * strides[d])
            .sum();
        for j in 0..extent {
            *slot = slot.max(x.data[base + j * strides[axis]]);
        }
        increment(&mut idx, &kept, &x.dims);
    }
    Tensor::new(out_dims, out)
}

/// Four-neighbor bilinear sample of `field` `[H, W, C]` at continuous
/// `(u, v) = (column, row)`; coordinates outside `[0, W-1] x [0, H-1]`
/// return a zero vector (border-zero policy). Integer coordinates return
/// the exact pixel.
pub fn bilinear_sample(field: &Tensor, u: f64, v: f64) -> Vec<f32> {
    assert_eq!(field.rank(), 3, "bilinear_sample expects [H, W, C]");
    let (h, w, c) = (field.dims[0], field.dims[1], field.dims[2]);
    let mut out = vec![0.0f32; c];
    if !u.is_finite() || !v.is_finite() {
        return out;
    }
    if u < 0.0 || v < 0.0 || u > (w - 1) as f64 || v > (h - 1) as f64 {
        return out;
    }
    let x0 = libm::floor(u) as usize;
    let y0 = libm::floor(v) as usize;
    let tx = u - x0 as f64;
    let ty = v - y0 as f64;
    // (corner, weight); out-of-range corners always carry zero weight here.
    let corners = [
        (y0, x0, (1.0 - tx) * (1.0 - ty)),
        (y0, x0 + 1, tx * (1.0 - ty)),
        (y0 + 1, x0, (1.0 - tx) * ty),
        (y0 + 1, x0 + 1, tx * ty),
    ];
    for ch in 0..c {
        let mut acc = 0.0f64;
        for &(y, x, wgt) in &corners {
            if wgt != 0.0 && y < h && x < w {
                acc += wgt * field.data[(y * w + x) * c + ch] as f64;
            }
        }
        out[ch] = acc as f32;
    }
    out
}

/// LayerNorm along the trailing dim with eps = 1e-5 and per-feature affine.
pub fn layer_norm(x: &Tensor, param: &Param) -> Result<Tensor, TensorError> {
    let c = param.fan_out();
    if x.trailing() != c {
        return Err(TensorError::ShapeMismatch {
            context: "layer_norm width",
            expected: c,
            got: x.trailing(),
        });
    }
    let rows = x.len() / c.max(1);
    let gamma = param.weight.data();
    let beta = param.bias.data();
    let mut out = vec![0.0f32; x.len()];
    for r in 0..rows {
        let xs = &x.data[r * c..(r + 1) * c];
        let mean = xs.iter().map(|&v| v as f64).sum::<f64>() / c as f64;
        let var = xs
            .iter()
            .map(|&v| {
                let d = v as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / c as f64;
        let inv = 1.0 / libm::sqrt(var + 1e-5);
        for i in 0..c {
            let z = (xs[i] as f64 - mean) * inv;
            out[r * c + i] = (z * gamma[i] as f64 + beta[i] as f64) as f32;
        }
    }
    Tensor::new(x.dims.clone(), out)
}

/// Parameter bundle for [`ffn`].
#[derive(Clone, Debug)]
pub struct FfnParams<'a> {
    pub ln: &'a Param,
    pub fc1: &'a Param,
    pub fc2: &'a Param,
}

impl<'a> FfnParams<'a> {
    pub fn fetch(store: &'a ParamStore, path: &str) -> Result<Self, TensorError> {
        Ok(Self {
            ln: store.get_joined(path, "ln")?,
            fc1: store.get_joined(path, "fc1")?,
            fc2: store.get_joined(path, "fc2")?,
        })
    }
}

/// Two-layer feed-forward block: LayerNorm -> linear -> ReLU -> linear.
pub fn ffn(x: &Tensor, p: &FfnParams<'_>) -> Result<Tensor, TensorError> {
    let normed = layer_norm(x, p.ln)?;
    let hidden = relu(&linear(&normed, p.fc1)?);
    linear(&hidden, p.fc2)
}

/// Declare the three parameters of an FFN under `path`.
pub fn declare_ffn(
    decl: &mut ParamDecl,
    path: &str,
    d_in: usize,
    d_hidden: usize,
    d_out: usize,
) -> Result<(), TensorError> {
    decl.layer_norm(&join(path, "ln"), d_in)?;
    decl.linear(&join(path, "fc1"), d_in, d_hidden)?;
    decl.linear(&join(path, "fc2"), d_hidden, d_out)?;
    Ok(())
}

pub(crate) fn join(path: &str, leaf: &str) -> alloc::string::String {
    let mut s = alloc::string::String::with_capacity(path.len() + 1 + leaf.len());
    s.push_str(path);
    s.push('.');
    s.push_str(leaf);
    s
}
