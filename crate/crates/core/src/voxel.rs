//! Voxelization of hybrid points and the triple-attention voxel feature
//! encoder: per-voxel point/channel/voxel attention weighting, stacked twice
//! with interleaved linear layers, then a channel-wise max over the point
//! axis.
//!
//! Padding rows are masked explicitly at every step: they are written as
//! zeros during augmentation, excluded from centroids and from every pooled
//! max, and re-zeroed after each linear layer, so perturbing stored padding
//! never changes the output.

use crate::densify::HybridPoint;
use crate::error::TensorError;
use crate::tensor::{linear, relu, sigmoid_scalar, Param, ParamDecl, ParamStore, Tensor};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Axis-aligned detection range and voxel size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub voxel: [f64; 3],
}

impl GridSpec {
    /// Voxel counts per axis. Extents must divide into whole voxels within
    /// 1e-6 and yield at least one cell per axis.
    pub fn cells(&self) -> [usize; 3] {
        let mut n = [0usize; 3];
        for a in 0..3 {
            let extent = self.max[a] - self.min[a];
            let exact = extent / self.voxel[a];
            let rounded = libm::round(exact);
            debug_assert!(
                libm::fabs(exact - rounded) < 1e-6 && rounded >= 1.0,
                "grid extent not a whole number of voxels"
            );
            n[a] = rounded as usize;
        }
        n
    }

    /// Voxel index of a point, or None when outside the range.
    pub fn index_of(&self, p: [f64; 3]) -> Option<[i32; 3]> {
        let cells = self.cells();
        let mut idx = [0i32; 3];
        for a in 0..3 {
            if p[a] < self.min[a] || p[a] >= self.max[a] {
                return None;
            }
            let i = libm::floor((p[a] - self.min[a]) / self.voxel[a]) as i64;
            if i < 0 || i >= cells[a] as i64 {
                return None;
            }
            idx[a] = i as i32;
        }
        Some(idx)
    }

    /// Geometric center of a voxel.
    pub fn center_of(&self, idx: [i32; 3]) -> [f64; 3] {
        [
            self.min[0] + (idx[0] as f64 + 0.5) * self.voxel[0],
            self.min[1] + (idx[1] as f64 + 0.5) * self.voxel[1],
            self.min[2] + (idx[2] as f64 + 0.5) * self.voxel[2],
        ]
    }
}

/// Padded per-voxel point tensor with the voxel index table.
///
/// Only non-empty voxels are stored; voxels are ordered by `(z, y, x)`
/// ascending index for deterministic emission.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelSet {
    /// `[N_V, N_P, C_in]` point features, zero-padded past each count.
    pub points: Tensor,
    /// Voxel integer indices, one per stored voxel.
    pub coords: Vec<[i32; 3]>,
    /// Actual point count per voxel, each at least 1 and at most `N_P`.
    pub counts: Vec<usize>,
}

impl VoxelSet {
    pub fn n_voxels(&self) -> usize {
        self.coords.len()
    }

    pub fn n_points(&self) -> usize {
        self.points.dims()[1]
    }

    pub fn width(&self) -> usize {
        self.points.dims()[2]
    }

    /// One voxel's `[N_P, C_in]` slice.
    pub fn voxel(&self, k: usize) -> &[f32] {
        let stride = self.n_points() * self.width();
        &self.points.data()[k * stride..(k + 1) * stride]
    }
}

/// Bin hybrid points into voxels, dropping points outside the range and
/// keeping the first `n_p` points per voxel in input order.
pub fn voxelize(points: &[HybridPoint], grid: &GridSpec, n_p: usize) -> VoxelSet {
    assert!(n_p >= 1);
    let mut buckets: BTreeMap<[i32; 3], Vec<Vec<f32>>> = BTreeMap::new();
    for p in points {
        if let Some(idx) = grid.index_of(p.pos) {
            // sort key (z, y, x)
            let key = [idx[2], idx[1], idx[0]];
            let slot = buckets.entry(key).or_default();
            if slot.len() < n_p {
                slot.push(p.feature());
            }
        }
    }
    let width = buckets
        .values()
        .next()
        .map(|rows| rows[0].len())
        .unwrap_or_else(|| points.first().map(|p| p.feature().len()).unwrap_or(0));
    let n_v = buckets.len();
    let mut data = vec![0.0f32; n_v * n_p * width];
    let mut coords = Vec::with_capacity(n_v);
    let mut counts = Vec::with_capacity(n_v);
    for (k, (key, rows)) in buckets.into_iter().enumerate() {
        coords.push([key[2], key[1], key[0]]);
        counts.push(rows.len());
        for (j, row) in rows.into_iter().enumerate() {
            let base = (k * n_p + j) * width;
            data[base..base + width].copy_from_slice(&row);
        }
    }
    VoxelSet {
        points: Tensor::new(vec![n_v, n_p, width], data).unwrap(),
        coords,
        counts,
    }
}

/// Mean of the actual point coordinates of voxel `k` (padding excluded).
/// Coordinates are the first three feature channels.
pub fn centroid(vs: &VoxelSet, k: usize) -> [f32; 3] {
    let count = vs.counts[k];
    let width = vs.width();
    let rows = vs.voxel(k);
    let mut acc = [0.0f64; 3];
    for j in 0..count {
        for a in 0..3 {
            acc[a] += rows[j * width + a] as f64;
        }
    }
    [
        (acc[0] / count as f64) as f32,
        (acc[1] / count as f64) as f32,
        (acc[2] / count as f64) as f32,
    ]
}

/// Append per-point offsets to the voxel geometric center and to the
/// intra-voxel centroid: `[N_P, C_in] -> [N_P, C_in + 6]`. Padding rows
/// stay all-zero regardless of stored content.
pub fn augment(vs: &VoxelSet, k: usize, grid: &GridSpec) -> Tensor {
    let n_p = vs.n_points();
    let c_in = vs.width();
    let count = vs.counts[k];
    let rows = vs.voxel(k);
    let c = centroid(vs, k);
    let gc = grid.center_of(vs.coords[k]);
    let gc = [gc[0] as f32, gc[1] as f32, gc[2] as f32];
    let c_out = c_in + 6;
    let mut out = vec![0.0f32; n_p * c_out];
    for j in 0..count {
        let src = &rows[j * c_in..(j + 1) * c_in];
        let dst = &mut out[j * c_out..(j + 1) * c_out];
        dst[..c_in].copy_from_slice(src);
        for a in 0..3 {
            dst[c_in + a] = src[a] - gc[a];
            dst[c_in + 3 + a] = src[a] - c[a];
        }
    }
    Tensor::new(vec![n_p, c_out], out).unwrap()
}

/// Tuning knobs for the encoder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TavfeConfig {
    /// Max points per voxel (N_P).
    pub n_p: usize,
    /// Channel width between the two attention blocks.
    pub hidden: usize,
    /// Output voxel feature width (C_out).
    pub out: usize,
    /// Pass the scalar voxel weight through a sigmoid gate.
    pub gate_sigmoid: bool,
}

impl Default for TavfeConfig {
    fn default() -> Self {
        Self {
            n_p: 10,
            hidden: 32,
            out: 32,
            gate_sigmoid: true,
        }
    }
}

fn stage_path(stage: usize, leaf: &str) -> String {
    let mut s = String::from("tavfe.ta");
    // stages are 1 and 2
    s.push(char::from(b'0' + stage as u8));
    s.push('.');
    s.push_str(leaf);
    s
}

/// Declare every parameter of the encoder for point capacity `n_p` and input
/// width `c_in` (pre-augmentation).
pub fn declare_tavfe_params(
    decl: &mut ParamDecl,
    cfg: &TavfeConfig,
    c_in: usize,
) -> Result<(), TensorError> {
    let widths = [c_in + 6, cfg.hidden];
    for (stage, &c) in [1usize, 2].iter().zip(widths.iter()) {
        decl.linear(&stage_path(*stage, "pw.fc1"), cfg.n_p, cfg.n_p)?;
        decl.linear(&stage_path(*stage, "pw.fc2"), cfg.n_p, cfg.n_p)?;
        decl.linear(&stage_path(*stage, "cw.fc1"), c, c)?;
        decl.linear(&stage_path(*stage, "cw.fc2"), c, c)?;
        decl.linear(&stage_path(*stage, "vox.point"), cfg.n_p, 1)?;
        decl.linear(&stage_path(*stage, "vox.chan"), c + 3, 1)?;
    }
    decl.linear("tavfe.lin1", c_in + 6, cfg.hidden)?;
    decl.linear("tavfe.lin2", cfg.hidden, cfg.out)?;
    Ok(())
}

struct TaStageParams<'a> {
    pw_fc1: &'a Param,
    pw_fc2: &'a Param,
    cw_fc1: &'a Param,
    cw_fc2: &'a Param,
    vox_point: &'a Param,
    vox_chan: &'a Param,
}

impl<'a> TaStageParams<'a> {
    fn fetch(store: &'a ParamStore, stage: usize) -> Result<Self, TensorError> {
        Ok(Self {
            pw_fc1: store.get(&stage_path(stage, "pw.fc1"))?,
            pw_fc2: store.get(&stage_path(stage, "pw.fc2"))?,
            cw_fc1: store.get(&stage_path(stage, "cw.fc1"))?,
            cw_fc2: store.get(&stage_path(stage, "cw.fc2"))?,
            vox_point: store.get(&stage_path(stage, "vox.point"))?,
            vox_chan: store.get(&stage_path(stage, "vox.chan"))?,
        })
    }
}

/// One triple-attention block on an augmented voxel `[N_P, C]`.
///
/// Point- and channel-wise pooled features pass through two linear layers
/// with a ReLU between; their outer product gated by a sigmoid forms the
/// combined weight matrix applied elementwise. A scalar voxel weight is
/// reduced from the weighted feature (point axis first, then channels, with
/// the centroid broadcast onto every row) and rescales the result.
pub fn ta_block(
    p_hat: &Tensor,
    centroid: [f32; 3],
    count: usize,
    store: &ParamStore,
    stage: usize,
    gate_sigmoid: bool,
) -> Result<Tensor, TensorError> {
    let [n_p, c]: [usize; 2] = match *p_hat.dims() {
        [a, b] => [a, b],
        _ => {
            return Err(TensorError::ShapeMismatch {
                context: "ta_block rank",
                expected: 2,
                got: p_hat.rank(),
            })
        }
    };
    let params = TaStageParams::fetch(store, stage)?;
    if params.cw_fc1.fan_in() != c {
        return Err(TensorError::ShapeMismatch {
            context: "ta_block channel width",
            expected: params.cw_fc1.fan_in(),
            got: c,
        });
    }
    let data = p_hat.data();

    // Point-wise pooled feature: max over channels for actual rows, zero for
    // padding rows (masked regardless of stored content).
    let mut pooled_points = vec![0.0f32; n_p];
    for (j, slot) in pooled_points.iter_mut().enumerate().take(count) {
        let row = &data[j * c..(j + 1) * c];
        *slot = row.iter().fold(f32::NEG_INFINITY, |m, &v| m.max(v));
    }
    // Channel-wise pooled feature: max over actual rows only.
    let mut pooled_chan = vec![f32::NEG_INFINITY; c];
    for j in 0..count {
        let row = &data[j * c..(j + 1) * c];
        for (m, &v) in pooled_chan.iter_mut().zip(row) {
            *m = m.max(v);
        }
    }

    let w_pw = linear(
        &relu(&linear(&Tensor::from_vec(pooled_points), params.pw_fc1)?),
        params.pw_fc2,
    )?;
    let w_cw = linear(
        &relu(&linear(&Tensor::from_vec(pooled_chan), params.cw_fc1)?),
        params.cw_fc2,
    )?;

    // M = sigmoid(W_pw x W_cw), applied elementwise to the input.
    let mut weighted = vec![0.0f32; n_p * c];
    for j in 0..n_p {
        let wp = w_pw.data()[j];
        for i in 0..c {
            let m = sigmoid_scalar(wp * w_cw.data()[i]);
            weighted[j * c + i] = m * data[j * c + i];
        }
    }

    // Voxel weight: [weighted, broadcast centroid] -> point-axis linear
    // (N_P -> 1) per channel -> channel linear (C + 3 -> 1) -> scalar.
    let ce = c + 3;
    let mut enriched = vec![0.0f32; n_p * ce];
    for j in 0..n_p {
        enriched[j * ce..j * ce + c].copy_from_slice(&weighted[j * c..(j + 1) * c]);
        enriched[j * ce + c] = centroid[0];
        enriched[j * ce + c + 1] = centroid[1];
        enriched[j * ce + c + 2] = centroid[2];
    }
    // Point-axis reduction: treat each channel's column as an N_P vector.
    let wp = params.vox_point.weight.data();
    let bp = params.vox_point.bias.data()[0];
    let mut per_channel = vec![0.0f32; ce];
    for (i, slot) in per_channel.iter_mut().enumerate() {
        let mut acc = bp as f64;
        for j in 0..n_p {
            acc += wp[j] as f64 * enriched[j * ce + i] as f64;
        }
        *slot = acc as f32;
    }
    let q_raw = linear(&Tensor::from_vec(per_channel), params.vox_chan)?.data()[0];
    let q = if gate_sigmoid {
        sigmoid_scalar(q_raw)
    } else {
        q_raw
    };

    let out: Vec<f32> = weighted.iter().map(|&v| q * v).collect();
    Tensor::new(vec![n_p, c], out)
}

/// Per-voxel output features plus the pass-through coordinate table.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelFeatures {
    /// `[N_V, C_out]`.
    pub features: Tensor,
    pub coords: Vec<[i32; 3]>,
    /// Intra-voxel centroids, carried for downstream projection.
    pub centroids: Vec<[f64; 3]>,
    /// Actual point counts, carried for count-weighted merging.
    pub counts: Vec<usize>,
}

fn zero_padding_rows(t: &mut Tensor, count: usize) {
    let dims = t.dims().to_vec();
    let (n_p, c) = (dims[0], dims[1]);
    let data = t.data_mut();
    for row in data.chunks_exact_mut(c).take(n_p).skip(count) {
        row.fill(0.0);
    }
}

/// Encode a voxel set: augment, two attention blocks with interleaved linear
/// layers, then a channel-wise max over actual points of each voxel.
pub fn tavfe(
    vs: &VoxelSet,
    grid: &GridSpec,
    store: &ParamStore,
    cfg: &TavfeConfig,
) -> Result<VoxelFeatures, TensorError> {
    let lin1 = store.get("tavfe.lin1")?;
    let lin2 = store.get("tavfe.lin2")?;
    let n_v = vs.n_voxels();
    let mut out = vec![0.0f32; n_v * cfg.out];
    let mut centroids = Vec::with_capacity(n_v);
    for k in 0..n_v {
        let count = vs.counts[k];
        let c = centroid(vs, k);
        centroids.push([c[0] as f64, c[1] as f64, c[2] as f64]);
        let aug = augment(vs, k, grid);
        let t1 = ta_block(&aug, c, count, store, 1, cfg.gate_sigmoid)?;
        let mut h = linear(&t1, lin1)?;
        zero_padding_rows(&mut h, count);
        let t2 = ta_block(&h, c, count, store, 2, cfg.gate_sigmoid)?;
        let mut f = linear(&t2, lin2)?;
        zero_padding_rows(&mut f, count);
        // channel-wise max over actual rows
        let row_out = &mut out[k * cfg.out..(k + 1) * cfg.out];
        let fd = f.data();
        for (i, slot) in row_out.iter_mut().enumerate() {
            let mut m = f32::NEG_INFINITY;
            for j in 0..count {
                m = m.max(fd[j * cfg.out + i]);
            }
            *slot = m;
        }
    }
    Ok(VoxelFeatures {
        features: Tensor::new(vec![n_v, cfg.out], out)?,
        coords: vs.coords.clone(),
        centroids,
        counts: vs.counts.clone(),
    })
}

/// VoD-style default grid: 0-51.2 m forward, +-25.6 m lateral, -3..2 m
/// height at (0.05, 0.05, 0.125) m voxels -> 1024 x 1024 x 40 cells.
pub fn vod_grid() -> GridSpec {
    GridSpec {
        min: [0.0, -25.6, -3.0],
        max: [51.2, 25.6, 2.0],
        voxel: [0.05, 0.05, 0.125],
    }
}
