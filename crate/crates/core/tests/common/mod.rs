//! Shared fixtures for the oracle suites.

#![allow(dead_code)]

use radfuse_core::geometry::Calibration;
use radfuse_core::rng::SplitMix64;
use radfuse_core::scene_fusion::{FeaturePyramid, PyramidLevel};
use radfuse_core::tensor::Tensor;

pub fn rand_tensor(rng: &mut SplitMix64, dims: &[usize], scale: f64) -> Tensor {
    let n: usize = dims.iter().product();
    Tensor::new(
        dims.to_vec(),
        (0..n).map(|_| rng.uniform(-scale, scale) as f32).collect(),
    )
    .unwrap()
}

/// VoD-style fixture: radar x forward / y left / z up into camera x right /
/// y down / z forward, 500 px focal, 640x480-ish principal point.
pub fn vod_calibration() -> Calibration {
    Calibration {
        intr: [
            [500.0, 0.0, 320.0, 0.0],
            [0.0, 500.0, 240.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ],
        r2c: [
            [0.0, -1.0, 0.0, 0.05],
            [0.0, 0.0, -1.0, -0.10],
            [1.0, 0.0, 0.0, 0.02],
            [0.0, 0.0, 0.0, 1.0],
        ],
    }
}

/// Random pyramid with the given strides and channel width.
pub fn rand_pyramid(
    rng: &mut SplitMix64,
    strides: &[f64],
    base_hw: (usize, usize),
    channels: usize,
) -> FeaturePyramid {
    let levels = strides
        .iter()
        .map(|&s| {
            let h = ((base_hw.0 as f64 / s).ceil() as usize).max(2);
            let w = ((base_hw.1 as f64 / s).ceil() as usize).max(2);
            PyramidLevel {
                features: rand_tensor(rng, &[h, w, channels], 1.0),
                stride: s,
            }
        })
        .collect();
    FeaturePyramid { levels }
}

/// Zero pyramid of the same layout.
pub fn zero_pyramid(strides: &[f64], base_hw: (usize, usize), channels: usize) -> FeaturePyramid {
    let levels = strides
        .iter()
        .map(|&s| {
            let h = ((base_hw.0 as f64 / s).ceil() as usize).max(2);
            let w = ((base_hw.1 as f64 / s).ceil() as usize).max(2);
            PyramidLevel {
                features: Tensor::zeros(&[h, w, channels]),
                stride: s,
            }
        })
        .collect();
    FeaturePyramid { levels }
}

/// Independent f64 matrix-vector multiply for 3x4 * 4-vector.
pub fn matvec34(m: &[[f64; 4]; 3], v: [f64; 4]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for r in 0..3 {
        for c in 0..4 {
            out[r] += m[r][c] * v[c];
        }
    }
    out
}

/// Independent f64 4x4 * 4x4 multiply.
pub fn matmul44(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            for k in 0..4 {
                out[r][c] += a[r][k] * b[k][c];
            }
        }
    }
    out
}

// ---- straight-line 64-bit reference of the deformable fusion block ------
//
// Re-derives the whole block from the equations with plain loops: projection
// of the reference point, offset/logit projections, per-head softmax over
// (level, point), bilinear sampling with the border-zero policy, per-head
// value projection, output projection, and the fusion FFN. Used as the
// oracle for both the scene-level and proposal-level blocks.

pub struct RefParam {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

pub fn ref_param(store: &radfuse_core::tensor::ParamStore, path: &str) -> RefParam {
    let p = store.get(path).unwrap();
    RefParam {
        w: p.weight.data().iter().map(|&v| v as f64).collect(),
        b: p.bias.data().iter().map(|&v| v as f64).collect(),
        rows: p.fan_out(),
        cols: p.fan_in(),
    }
}

pub fn ref_linear(p: &RefParam, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), p.cols);
    (0..p.rows)
        .map(|o| {
            let mut acc = p.b[o];
            for i in 0..p.cols {
                acc += p.w[o * p.cols + i] * x[i];
            }
            acc
        })
        .collect()
}

pub fn ref_bilinear(level: &PyramidLevel, u: f64, v: f64) -> Vec<f64> {
    let dims = level.features.dims();
    let (h, w, c) = (dims[0], dims[1], dims[2]);
    if u < 0.0 || v < 0.0 || u > (w - 1) as f64 || v > (h - 1) as f64 {
        return vec![0.0; c];
    }
    let x0 = u.floor() as usize;
    let y0 = v.floor() as usize;
    let tx = u - x0 as f64;
    let ty = v - y0 as f64;
    let at = |y: usize, x: usize, ch: usize| -> f64 {
        if y < h && x < w {
            level.features.data()[(y * w + x) * c + ch] as f64
        } else {
            0.0
        }
    };
    (0..c)
        .map(|ch| {
            let top = at(y0, x0, ch) * (1.0 - tx) + at(y0, x0 + 1, ch) * tx;
            let bot = at(y0 + 1, x0, ch) * (1.0 - tx) + at(y0 + 1, x0 + 1, ch) * tx;
            top * (1.0 - ty) + bot * ty
        })
        .collect()
}

pub fn ref_ffn(
    store: &radfuse_core::tensor::ParamStore,
    prefix: &str,
    x: &[f64],
) -> Vec<f64> {
    let ln = store.get(&format!("{prefix}.ln")).unwrap();
    let gamma = ln.weight.data();
    let beta = ln.bias.data();
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let inv = 1.0 / (var + 1e-5).sqrt();
    let normed: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v - mean) * inv * gamma[i] as f64 + beta[i] as f64)
        .collect();
    let fc1 = ref_param(store, &format!("{prefix}.fc1"));
    let fc2 = ref_param(store, &format!("{prefix}.fc2"));
    let hidden: Vec<f64> = ref_linear(&fc1, &normed)
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    ref_linear(&fc2, &hidden)
}

/// Project a point through `intr * r2c` with plain loops; None when behind
/// the camera.
pub fn ref_project(p: [f64; 3], cal: &Calibration) -> Option<(f64, f64)> {
    let h = [p[0], p[1], p[2], 1.0];
    let mut cam = [0.0f64; 4];
    for r in 0..4 {
        for c in 0..4 {
            cam[r] += cal.r2c[r][c] * h[c];
        }
    }
    let uvd = matvec34(&cal.intr, cam);
    if uvd[2] <= 1e-6 {
        return None;
    }
    Some((uvd[0] / uvd[2], uvd[1] / uvd[2]))
}

/// Full straight-line block: query + reference -> fused feature.
pub fn ref_deform_fuse(
    store: &radfuse_core::tensor::ParamStore,
    prefix: &str,
    query: &[f32],
    reference: Option<(f64, f64)>,
    pyr: &FeaturePyramid,
    heads: usize,
    points: usize,
) -> Vec<f64> {
    let c_q = query.len();
    let q: Vec<f64> = query.iter().map(|&v| v as f64).collect();
    let n_levels = pyr.n_levels();
    let offset = ref_param(store, &format!("{prefix}.offset"));
    let attn = ref_param(store, &format!("{prefix}.attn"));
    let value = ref_param(store, &format!("{prefix}.value"));
    let output = ref_param(store, &format!("{prefix}.out"));
    let offsets = ref_linear(&offset, &q);
    let logits = ref_linear(&attn, &q);
    // per-head softmax over (level, point)
    let group = n_levels * points;
    let mut weights = vec![0.0f64; logits.len()];
    for m in 0..heads {
        let chunk = &logits[m * group..(m + 1) * group];
        let mx = chunk.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = chunk.iter().map(|&v| (v - mx).exp()).collect();
        let sum: f64 = exps.iter().sum();
        for (i, e) in exps.into_iter().enumerate() {
            weights[m * group + i] = e / sum;
        }
    }
    let d_head = c_q / heads;
    let c_img = pyr.channels();
    let mut enhanced = vec![0.0f64; c_q];
    if let Some((ur, vr)) = reference {
        let mut head_acc = vec![0.0f64; c_q];
        for m in 0..heads {
            for j in 0..n_levels {
                for l in 0..points {
                    let slot = (m * n_levels + j) * points + l;
                    let du = offsets[slot * 2];
                    let dv = offsets[slot * 2 + 1];
                    let s = pyr.levels[j].stride;
                    let f = ref_bilinear(&pyr.levels[j], (ur + du) / s, (vr + dv) / s);
                    for r in 0..d_head {
                        let mut acc = value.b[m * d_head + r];
                        for i in 0..c_img {
                            acc += value.w[(m * d_head + r) * c_img + i] * f[i];
                        }
                        head_acc[m * d_head + r] += weights[slot] * acc;
                    }
                }
            }
        }
        enhanced = ref_linear(&output, &head_acc);
    }
    let mut cat = q;
    cat.extend_from_slice(&enhanced);
    ref_ffn(store, &format!("{prefix}.fuse"), &cat)
}

/// Gaussian elimination with partial pivoting on an n x n system; the
/// linear-solve oracle for reprojection tests.
pub fn solve_dense(a: &mut Vec<Vec<f64>>, b: &mut Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[pivot][col].abs() {
                pivot = r;
            }
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        assert!(p.abs() > 1e-12, "singular system in test oracle");
        for r in 0..n {
            if r != col {
                let f = a[r][col] / p;
                for c in 0..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}
