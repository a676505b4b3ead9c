//! Directional-derivative checking for the differentiable ops.
//!
//! Each supported op has a 64-bit shadow evaluation generic over a scalar
//! type. Running it on dual numbers yields the exact analytic directional
//! derivative J.v; running it on plain f64 at `x + h v` and `x - h v` yields
//! the central finite difference. The two must agree to 1e-4 relative error.
//!
//! Piecewise ops (ReLU inside FFN, bilinear cells, image borders) record a
//! discrete signature during evaluation; when the two finite-difference
//! evaluations disagree on the signature the input straddles a kink and the
//! comparison is flagged instead of failed.

use crate::error::TensorError;
use crate::scene_fusion::{DeformConfig, DeformParams, FeaturePyramid};
use crate::tensor::{FfnParams, Param, Tensor};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

/// Central finite-difference step on the 64-bit shadow path.
pub const FD_STEP: f64 = 1e-3;

/// Pass threshold on the max relative error.
pub const PASS_THRESHOLD: f64 = 1e-4;

/// Scalar abstraction shared by the f64 and dual-number shadow paths.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn lift(v: f64) -> Self;
    fn value(self) -> f64;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    /// max(0, x); the caller records the sign in the signature.
    fn max0(self) -> Self;
}

impl Scalar for f64 {
    fn lift(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        libm::exp(self)
    }
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    fn max0(self) -> Self {
        if self > 0.0 {
            self
        } else {
            0.0
        }
    }
}

/// Forward-mode dual number: value plus tangent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub t: f64,
}

impl Dual {
    pub fn new(v: f64, t: f64) -> Self {
        Self { v, t }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, r: Dual) -> Dual {
        Dual::new(self.v + r.v, self.t + r.t)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, r: Dual) -> Dual {
        Dual::new(self.v - r.v, self.t - r.t)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, r: Dual) -> Dual {
        Dual::new(self.v * r.v, self.t * r.v + self.v * r.t)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, r: Dual) -> Dual {
        Dual::new(self.v / r.v, (self.t * r.v - self.v * r.t) / (r.v * r.v))
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.t)
    }
}

impl Scalar for Dual {
    fn lift(v: f64) -> Self {
        Dual::new(v, 0.0)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn exp(self) -> Self {
        let e = libm::exp(self.v);
        Dual::new(e, self.t * e)
    }
    fn sqrt(self) -> Self {
        let s = libm::sqrt(self.v);
        Dual::new(s, self.t / (2.0 * s))
    }
    fn max0(self) -> Self {
        if self.v > 0.0 {
            self
        } else {
            Dual::new(0.0, 0.0)
        }
    }
}

/// Discrete structure of one evaluation; differing signatures between the
/// two finite-difference points mean the segment crosses a kink.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature(Vec<u64>);

impl Signature {
    fn push(&mut self, w: u64) {
        self.0.push(w);
    }
}

// ---- generic shadow ops -------------------------------------------------

fn shadow_linear<S: Scalar>(x: &[S], p: &Param) -> Vec<S> {
    let c_in = p.fan_in();
    let c_out = p.fan_out();
    let w = p.weight.data();
    let b = p.bias.data();
    let mut out = Vec::with_capacity(c_out);
    for o in 0..c_out {
        let mut acc = S::lift(b[o] as f64);
        for i in 0..c_in {
            acc = acc + x[i] * S::lift(w[o * c_in + i] as f64);
        }
        out.push(acc);
    }
    out
}

fn shadow_sigmoid<S: Scalar>(x: &[S]) -> Vec<S> {
    x.iter()
        .map(|&v| S::lift(1.0) / (S::lift(1.0) + (-v).exp()))
        .collect()
}

/// Softmax over contiguous groups of `group` elements.
fn shadow_softmax_groups<S: Scalar>(x: &[S], group: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(x.len());
    for chunk in x.chunks(group) {
        let mx = chunk
            .iter()
            .map(|s| s.value())
            .fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<S> = chunk.iter().map(|&v| (v - S::lift(mx)).exp()).collect();
        let mut sum = S::lift(0.0);
        for &e in &exps {
            sum = sum + e;
        }
        for e in exps {
            out.push(e / sum);
        }
    }
    out
}

fn shadow_layer_norm<S: Scalar>(x: &[S], p: &Param) -> Vec<S> {
    let c = x.len();
    let gamma = p.weight.data();
    let beta = p.bias.data();
    let inv_n = S::lift(1.0 / c as f64);
    let mut mean = S::lift(0.0);
    for &v in x {
        mean = mean + v;
    }
    mean = mean * inv_n;
    let mut var = S::lift(0.0);
    for &v in x {
        let d = v - mean;
        var = var + d * d;
    }
    var = var * inv_n;
    let inv = S::lift(1.0) / (var + S::lift(1e-5)).sqrt();
    x.iter()
        .enumerate()
        .map(|(i, &v)| (v - mean) * inv * S::lift(gamma[i] as f64) + S::lift(beta[i] as f64))
        .collect()
}

fn shadow_relu<S: Scalar>(x: &[S], sig: &mut Signature) -> Vec<S> {
    x.iter()
        .map(|&v| {
            sig.push((v.value() > 0.0) as u64);
            v.max0()
        })
        .collect()
}

fn shadow_ffn<S: Scalar>(x: &[S], p: &FfnParams<'_>, sig: &mut Signature) -> Vec<S> {
    let normed = shadow_layer_norm(x, p.ln);
    let pre = shadow_linear(&normed, p.fc1);
    let hidden = shadow_relu(&pre, sig);
    shadow_linear(&hidden, p.fc2)
}

/// Bilinear sample with the border-zero policy; the signature records the
/// in/out flag and the cell indices.
fn shadow_bilinear<S: Scalar>(field: &Tensor, u: S, v: S, sig: &mut Signature) -> Vec<S> {
    let (h, w, c) = (field.dims()[0], field.dims()[1], field.dims()[2]);
    let (uv, vv) = (u.value(), v.value());
    let inside = uv >= 0.0 && vv >= 0.0 && uv <= (w - 1) as f64 && vv <= (h - 1) as f64;
    sig.push(inside as u64);
    if !inside {
        return vec![S::lift(0.0); c];
    }
    let x0 = libm::floor(uv) as usize;
    let y0 = libm::floor(vv) as usize;
    sig.push(x0 as u64);
    sig.push(y0 as u64);
    let tx = u - S::lift(x0 as f64);
    let ty = v - S::lift(y0 as f64);
    let one = S::lift(1.0);
    let data = field.data();
    let pix = |y: usize, x: usize, ch: usize| -> f64 {
        if y < h && x < w {
            data[(y * w + x) * c + ch] as f64
        } else {
            0.0
        }
    };
    let mut out = Vec::with_capacity(c);
    for ch in 0..c {
        let f00 = S::lift(pix(y0, x0, ch));
        let f01 = S::lift(pix(y0, x0 + 1, ch));
        let f10 = S::lift(pix(y0 + 1, x0, ch));
        let f11 = S::lift(pix(y0 + 1, x0 + 1, ch));
        let top = f00 * (one - tx) + f01 * tx;
        let bot = f10 * (one - tx) + f11 * tx;
        out.push(top * (one - ty) + bot * ty);
    }
    out
}

/// Fixed context of one deformable block differentiated w.r.t. its query.
pub struct DeformToy<'a> {
    pub pyramid: &'a FeaturePyramid,
    pub params: DeformParams<'a>,
    pub cfg: DeformConfig,
    /// Full-resolution reference point.
    pub reference: (f64, f64),
}

/// Shadow re-evaluation of a deformable fusion block for one query: offsets
/// and logits from the query, per-head softmax over (level, point), bilinear
/// sampling at reference + offset over stride, per-head value projection,
/// output projection, then the fusion FFN over concat(query, enhanced).
fn shadow_deform_fuse<S: Scalar>(q: &[S], toy: &DeformToy<'_>, sig: &mut Signature) -> Vec<S> {
    let c_q = q.len();
    let n_levels = toy.pyramid.n_levels();
    let (heads, pts) = (toy.cfg.heads, toy.cfg.points);
    let d_head = c_q / heads;
    let c_img = toy.pyramid.channels();
    let offsets = shadow_linear(q, toy.params.offset);
    let logits = shadow_linear(q, toy.params.attn);
    let attn = shadow_softmax_groups(&logits, n_levels * pts);
    let wv = toy.params.value.weight.data();
    let bv = toy.params.value.bias.data();
    let mut head_acc = vec![S::lift(0.0); c_q];
    for m in 0..heads {
        for j in 0..n_levels {
            let level = &toy.pyramid.levels[j];
            let inv_stride = S::lift(1.0 / level.stride);
            for l in 0..pts {
                let slot = (m * n_levels + j) * pts + l;
                let su = (S::lift(toy.reference.0) + offsets[slot * 2]) * inv_stride;
                let sv = (S::lift(toy.reference.1) + offsets[slot * 2 + 1]) * inv_stride;
                let f = shadow_bilinear(&level.features, su, sv, sig);
                for r in 0..d_head {
                    let row = &wv[(m * d_head + r) * c_img..(m * d_head + r + 1) * c_img];
                    let mut acc = S::lift(bv[m * d_head + r] as f64);
                    for (x, wgt) in f.iter().zip(row) {
                        acc = acc + *x * S::lift(*wgt as f64);
                    }
                    head_acc[m * d_head + r] = head_acc[m * d_head + r] + attn[slot] * acc;
                }
            }
        }
    }
    let enhanced = shadow_linear(&head_acc, toy.params.output);
    let mut cat: Vec<S> = Vec::with_capacity(2 * c_q);
    cat.extend_from_slice(q);
    cat.extend_from_slice(&enhanced);
    shadow_ffn(&cat, &toy.params.fuse, sig)
}

// ---- checker ------------------------------------------------------------

/// Which op to differentiate. The deformable variants differentiate w.r.t.
/// the query feature with everything else held fixed.
pub enum JvpOp<'a> {
    Linear(&'a Param),
    Sigmoid,
    /// Softmax over contiguous trailing groups of this size.
    SoftmaxGroups(usize),
    Ffn(FfnParams<'a>),
    /// Input is the 2-vector (u, v); the field is fixed.
    Bilinear(&'a Tensor),
    /// Scene-level fusion block.
    Qgslf(DeformToy<'a>),
    /// Proposal-level fusion block.
    Qgplf(DeformToy<'a>),
}

impl JvpOp<'_> {
    fn eval<S: Scalar>(&self, x: &[S], sig: &mut Signature) -> Vec<S> {
        match self {
            JvpOp::Linear(p) => shadow_linear(x, p),
            JvpOp::Sigmoid => shadow_sigmoid(x),
            JvpOp::SoftmaxGroups(g) => shadow_softmax_groups(x, *g),
            JvpOp::Ffn(p) => shadow_ffn(x, p, sig),
            JvpOp::Bilinear(field) => shadow_bilinear(field, x[0], x[1], sig),
            JvpOp::Qgslf(toy) | JvpOp::Qgplf(toy) => shadow_deform_fuse(x, toy, sig),
        }
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct JvpReport {
    /// max over outputs of |analytic - fd| / max(1, |analytic|, |fd|).
    pub max_rel_err: f64,
    /// The two finite-difference points landed on different sides of a
    /// ReLU/bilinear-cell/border boundary; the comparison is inconclusive.
    pub kink: bool,
}

impl JvpReport {
    pub fn passed(&self) -> bool {
        !self.kink && self.max_rel_err < PASS_THRESHOLD
    }
}

/// Compare the analytic directional derivative against the central finite
/// difference `(f(x + h v) - f(x - h v)) / 2h` on the f64 shadow path.
pub fn jvp_check(op: &JvpOp<'_>, x: &Tensor, v: &Tensor) -> Result<JvpReport, TensorError> {
    if x.len() != v.len() {
        return Err(TensorError::ShapeMismatch {
            context: "jvp direction length",
            expected: x.len(),
            got: v.len(),
        });
    }
    let duals: Vec<Dual> = x
        .data()
        .iter()
        .zip(v.data())
        .map(|(&xv, &tv)| Dual::new(xv as f64, tv as f64))
        .collect();
    let mut sig_d = Signature::default();
    let analytic: Vec<f64> = op.eval(&duals, &mut sig_d).iter().map(|d| d.t).collect();

    let h = FD_STEP;
    let plus: Vec<f64> = x
        .data()
        .iter()
        .zip(v.data())
        .map(|(&xv, &tv)| xv as f64 + h * tv as f64)
        .collect();
    let minus: Vec<f64> = x
        .data()
        .iter()
        .zip(v.data())
        .map(|(&xv, &tv)| xv as f64 - h * tv as f64)
        .collect();
    let mut sig_p = Signature::default();
    let fp = op.eval(&plus, &mut sig_p);
    let mut sig_m = Signature::default();
    let fm = op.eval(&minus, &mut sig_m);
    let kink = sig_p != sig_m;

    let mut max_rel = 0.0f64;
    for i in 0..analytic.len() {
        let fd = (fp[i] - fm[i]) / (2.0 * h);
        let denom = 1.0f64.max(libm::fabs(analytic[i])).max(libm::fabs(fd));
        let rel = libm::fabs(analytic[i] - fd) / denom;
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(JvpReport {
        max_rel_err: max_rel,
        kink,
    })
}
