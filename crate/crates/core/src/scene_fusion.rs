//! Scene-level fusion: multi-scale sparse voxel features query the image
//! pyramid through deformable attention, the enhanced features are RoI-grid
//! pooled per proposal, and the pooled blocks of the selected scales are
//! concatenated.
//!
//! Also carries the two backbone stand-ins: a group-by downsampler in place
//! of the sparse-conv stack and a BEV-density proposal heuristic in place of
//! the RPN.

use crate::boxes::Box3D;
use crate::densify::HybridPoint;
use crate::error::TensorError;
use crate::geometry::{self, Calibration, Projected};
use crate::tensor::{ffn, linear, softmax_over, FfnParams, Param, ParamDecl, ParamStore, Tensor};
use crate::voxel::VoxelFeatures;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// One image feature level: `[H, W, C]` plus its stride in pixels per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct PyramidLevel {
    pub features: Tensor,
    pub stride: f64,
}

/// Multi-scale image features with strictly increasing strides and a common
/// channel width.
#[derive(Clone, Debug, PartialEq)]
pub struct FeaturePyramid {
    pub levels: Vec<PyramidLevel>,
}

impl FeaturePyramid {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn channels(&self) -> usize {
        self.levels.first().map(|l| l.features.dims()[2]).unwrap_or(0)
    }

    pub fn validate(&self) -> bool {
        if self.levels.is_empty() {
            return false;
        }
        let c = self.channels();
        let mut prev = 0.0;
        for l in &self.levels {
            if l.features.rank() != 3 || l.features.dims()[2] != c {
                return false;
            }
            if l.stride <= prev {
                return false;
            }
            prev = l.stride;
        }
        true
    }
}

/// Sparse per-voxel features at one downsampling scale.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVoxelFeatures {
    /// `[N, C]`.
    pub features: Tensor,
    pub coords: Vec<[i32; 3]>,
    pub centroids: Vec<[f64; 3]>,
    pub counts: Vec<usize>,
    pub scale: u32,
}

impl SparseVoxelFeatures {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn width(&self) -> usize {
        self.features.dims()[1]
    }

    pub fn row(&self, k: usize) -> &[f32] {
        let c = self.width();
        &self.features.data()[k * c..(k + 1) * c]
    }
}

/// An oriented proposal box with score and class.
#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub box3d: Box3D,
    pub score: f32,
    pub class: usize,
}

/// Declare the per-scale linear layers of the downsampler.
pub fn declare_downsample_params(
    decl: &mut ParamDecl,
    c_in: usize,
    c_out: usize,
) -> Result<(), TensorError> {
    for s in [1u32, 2, 4, 8] {
        decl.linear(&format!("msds.x{s}"), c_in, c_out)?;
    }
    Ok(())
}

/// Stand-in for the sparse-conv backbone: level `s` merges voxels sharing
/// `floor(coord / s)`; the merged feature is the channel-wise max of the
/// members passed through that level's linear layer, the merged centroid the
/// count-weighted mean.
pub fn multiscale_downsample(
    vf: &VoxelFeatures,
    store: &ParamStore,
) -> Result<Vec<SparseVoxelFeatures>, TensorError> {
    let c_in = vf.features.dims()[1];
    let mut out = Vec::with_capacity(4);
    for s in [1u32, 2, 4, 8] {
        let lin = store.get(&format!("msds.x{s}"))?;
        let mut groups: BTreeMap<[i32; 3], (Vec<f32>, [f64; 3], usize)> = BTreeMap::new();
        for k in 0..vf.coords.len() {
            let cd = vf.coords[k];
            let key = [
                cd[2].div_euclid(s as i32),
                cd[1].div_euclid(s as i32),
                cd[0].div_euclid(s as i32),
            ];
            let row = &vf.features.data()[k * c_in..(k + 1) * c_in];
            let count = vf.counts[k];
            let entry = groups
                .entry(key)
                .or_insert_with(|| (vec![f32::NEG_INFINITY; c_in], [0.0; 3], 0));
            for (m, &v) in entry.0.iter_mut().zip(row) {
                *m = m.max(v);
            }
            for a in 0..3 {
                entry.1[a] += vf.centroids[k][a] * count as f64;
            }
            entry.2 += count;
        }
        let n = groups.len();
        let c_out = lin.fan_out();
        let mut feats = vec![0.0f32; n * c_out];
        let mut coords = Vec::with_capacity(n);
        let mut centroids = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        for (g, (key, (maxed, csum, total))) in groups.into_iter().enumerate() {
            coords.push([key[2], key[1], key[0]]);
            centroids.push([
                csum[0] / total as f64,
                csum[1] / total as f64,
                csum[2] / total as f64,
            ]);
            counts.push(total);
            let y = linear(&Tensor::from_vec(maxed), lin)?;
            feats[g * c_out..(g + 1) * c_out].copy_from_slice(y.data());
        }
        out.push(SparseVoxelFeatures {
            features: Tensor::new(vec![n, c_out], feats)?,
            coords,
            centroids,
            counts,
            scale: s,
        });
    }
    Ok(out)
}

/// Named anchor sizes `(l, w, h)` per class id.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorSet {
    pub sizes: Vec<[f64; 3]>,
}

/// RPN stand-in: hash hybrid points into BEV cells, find local density
/// peaks, place one anchor-sized, yaw-zero box per peak per class scored by
/// normalized peak density, and return the top k.
pub fn heuristic_proposals(
    points: &[HybridPoint],
    anchors: &AnchorSet,
    k: usize,
    bev_cell: f64,
) -> Vec<Proposal> {
    assert!(k >= 1);
    if points.is_empty() || anchors.sizes.is_empty() {
        return Vec::new();
    }
    let mut cells: BTreeMap<[i64; 2], (usize, f64)> = BTreeMap::new();
    for p in points {
        let ix = libm::floor(p.pos[0] / bev_cell) as i64;
        let iy = libm::floor(p.pos[1] / bev_cell) as i64;
        let e = cells.entry([ix, iy]).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += p.pos[2];
    }
    let max_count = cells.values().map(|e| e.0).max().unwrap_or(1) as f32;
    // local maxima over the 8-neighborhood
    let mut peaks: Vec<([i64; 2], usize, f64)> = Vec::new();
    for (&key, &(count, zsum)) in &cells {
        let mut is_peak = true;
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                if let Some(&(nc, _)) = cells.get(&[key[0] + dx, key[1] + dy]) {
                    if nc > count {
                        is_peak = false;
                    }
                }
            }
        }
        if is_peak {
            peaks.push((key, count, zsum / count as f64));
        }
    }
    peaks.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut out = Vec::new();
    'outer: for (key, count, zc) in peaks {
        for (class, size) in anchors.sizes.iter().enumerate() {
            if out.len() >= k {
                break 'outer;
            }
            let center = [
                (key[0] as f64 + 0.5) * bev_cell,
                (key[1] as f64 + 0.5) * bev_cell,
                zc,
            ];
            out.push(Proposal {
                box3d: Box3D::new(center, *size, 0.0),
                score: count as f32 / max_count,
                class,
            });
        }
    }
    out
}

/// Head/sampling geometry of a deformable attention block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformConfig {
    pub heads: usize,
    pub points: usize,
}

/// Parameter bundle for one deformable attention block.
pub struct DeformParams<'a> {
    pub offset: &'a Param,
    pub attn: &'a Param,
    pub value: &'a Param,
    pub output: &'a Param,
    pub fuse: FfnParams<'a>,
}

impl<'a> DeformParams<'a> {
    pub fn fetch(store: &'a ParamStore, prefix: &str) -> Result<Self, TensorError> {
        Ok(Self {
            offset: store.get_joined(prefix, "offset")?,
            attn: store.get_joined(prefix, "attn")?,
            value: store.get_joined(prefix, "value")?,
            output: store.get_joined(prefix, "out")?,
            fuse: FfnParams::fetch(store, &crate::tensor::join(prefix, "fuse"))?,
        })
    }
}

/// Declare one deformable block's parameters under `prefix` for query width
/// `c_q`, image channel width `c_img`, `n_levels` pyramid levels, and an FFN
/// hidden width `ffn_hidden`.
pub fn declare_deform_params(
    decl: &mut ParamDecl,
    prefix: &str,
    c_q: usize,
    c_img: usize,
    cfg: &DeformConfig,
    n_levels: usize,
    ffn_hidden: usize,
) -> Result<(), TensorError> {
    let slots = cfg.heads * n_levels * cfg.points;
    decl.linear(&crate::tensor::join(prefix, "offset"), c_q, slots * 2)?;
    decl.linear(&crate::tensor::join(prefix, "attn"), c_q, slots)?;
    decl.linear(&crate::tensor::join(prefix, "value"), c_img, c_q)?;
    decl.linear(&crate::tensor::join(prefix, "out"), c_q, c_q)?;
    crate::tensor::declare_ffn(
        decl,
        &crate::tensor::join(prefix, "fuse"),
        2 * c_q,
        ffn_hidden,
        c_q,
    )?;
    Ok(())
}

/// Result of one deformable attention evaluation.
pub struct DeformOutput {
    /// Image-enhanced query, width `c_q`; all zeros for a dropped reference.
    pub enhanced: Vec<f32>,
    /// Normalized attention weights `[heads, n_levels, points]`; every
    /// per-head slice sums to 1.
    pub attn: Tensor,
}

/// Core multi-scale deformable attention for a single query.
///
/// Offsets and attention logits come from two linear projections of the
/// query; logits are softmax-normalized per head over all `(level, point)`
/// slots; each sample position is the full-resolution reference plus its
/// pixel-space offset, divided by the level stride, sampled bilinearly; the
/// value projection splits into `heads` slices of `c_q / heads` channels and
/// the weighted sums are recombined by the output projection.
pub fn deform_attend(
    query: &[f32],
    reference: Option<(f64, f64)>,
    pyr: &FeaturePyramid,
    params: &DeformParams<'_>,
    cfg: &DeformConfig,
) -> Result<DeformOutput, TensorError> {
    let c_q = query.len();
    let n_levels = pyr.n_levels();
    let slots = cfg.heads * n_levels * cfg.points;
    if params.offset.fan_out() != slots * 2 {
        return Err(TensorError::ShapeMismatch {
            context: "deform offset slots",
            expected: slots * 2,
            got: params.offset.fan_out(),
        });
    }
    if c_q % cfg.heads != 0 {
        return Err(TensorError::ShapeMismatch {
            context: "deform head split",
            expected: cfg.heads,
            got: c_q,
        });
    }
    let d_head = c_q / cfg.heads;
    let q = Tensor::from_vec(query.to_vec());
    let offsets = linear(&q, params.offset)?;
    let logits = linear(&q, params.attn)?
        .reshape(vec![cfg.heads, n_levels, cfg.points])?;
    let attn = softmax_over(&logits, &[1, 2])?;

    let mut enhanced = vec![0.0f32; c_q];
    if let Some((ur, vr)) = reference {
        let mut head_acc = vec![0.0f64; c_q];
        let od = offsets.data();
        let ad = attn.data();
        let wv = params.value.weight.data();
        let bv = params.value.bias.data();
        let c_img = pyr.channels();
        for m in 0..cfg.heads {
            for j in 0..n_levels {
                let level = &pyr.levels[j];
                for l in 0..cfg.points {
                    let slot = (m * n_levels + j) * cfg.points + l;
                    let du = od[slot * 2] as f64;
                    let dv = od[slot * 2 + 1] as f64;
                    let w = ad[slot] as f64;
                    let f = crate::tensor::bilinear_sample(
                        &level.features,
                        (ur + du) / level.stride,
                        (vr + dv) / level.stride,
                    );
                    // per-head value projection rows
                    for r in 0..d_head {
                        let wrow = &wv[(m * d_head + r) * c_img..(m * d_head + r + 1) * c_img];
                        let mut acc = bv[m * d_head + r] as f64;
                        for (x, wgt) in f.iter().zip(wrow) {
                            acc += *x as f64 * *wgt as f64;
                        }
                        head_acc[m * d_head + r] += w * acc;
                    }
                }
            }
        }
        let heads_vec: Vec<f32> = head_acc.iter().map(|&v| v as f32).collect();
        let y = linear(&Tensor::from_vec(heads_vec), params.output)?;
        enhanced.copy_from_slice(y.data());
    }
    Ok(DeformOutput { enhanced, attn })
}

/// Fuse one scale of sparse voxel features with the image pyramid.
///
/// Per voxel: project the centroid for the reference point, run deformable
/// attention, and combine `FFN(concat(original, enhanced))`. Voxels whose
/// centroid projects behind the camera get a zero enhancement but still pass
/// through the fusion FFN.
pub fn qgslf_block(
    x: &SparseVoxelFeatures,
    pyr: &FeaturePyramid,
    cal: &Calibration,
    store: &ParamStore,
    prefix: &str,
    cfg: &DeformConfig,
) -> Result<SparseVoxelFeatures, TensorError> {
    let params = DeformParams::fetch(store, prefix)?;
    let c = x.width();
    let n = x.len();
    let mut out = vec![0.0f32; n * c];
    for k in 0..n {
        let reference = match geometry::project(x.centroids[k], cal) {
            Projected::Pixel { u, v, .. } => Some((u, v)),
            Projected::Dropped => None,
        };
        let att = deform_attend(x.row(k), reference, pyr, &params, cfg)?;
        let mut cat = Vec::with_capacity(2 * c);
        cat.extend_from_slice(x.row(k));
        cat.extend_from_slice(&att.enhanced);
        let fused = ffn(&Tensor::from_vec(cat), &params.fuse)?;
        out[k * c..(k + 1) * c].copy_from_slice(fused.data());
    }
    Ok(SparseVoxelFeatures {
        features: Tensor::new(vec![n, c], out)?,
        coords: x.coords.clone(),
        centroids: x.centroids.clone(),
        counts: x.counts.clone(),
        scale: x.scale,
    })
}

/// Pool enhanced voxel features onto a `g^3` grid inside each proposal.
///
/// Each grid cell takes the channel-wise max over voxels whose centroid lies
/// within half the cell diagonal of the cell center (zero vector when none).
/// Cells flatten in `(gx, gy, gz)` nesting, z fastest.
pub fn roi_grid_pool(
    feats: &SparseVoxelFeatures,
    proposals: &[Proposal],
    g: usize,
) -> Tensor {
    assert!(g >= 1);
    let c = feats.width();
    let cells = g * g * g;
    let mut out = vec![0.0f32; proposals.len() * cells * c];
    for (pi, p) in proposals.iter().enumerate() {
        let b = &p.box3d;
        let cell_diag = [
            b.size[0] / g as f64,
            b.size[1] / g as f64,
            b.size[2] / g as f64,
        ];
        let rho = 0.5
            * libm::sqrt(
                cell_diag[0] * cell_diag[0]
                    + cell_diag[1] * cell_diag[1]
                    + cell_diag[2] * cell_diag[2],
            );
        let rho2 = rho * rho;
        for gx in 0..g {
            for gy in 0..g {
                for gz in 0..g {
                    let local = [
                        ((gx as f64 + 0.5) / g as f64 - 0.5) * b.size[0],
                        ((gy as f64 + 0.5) / g as f64 - 0.5) * b.size[1],
                        ((gz as f64 + 0.5) / g as f64 - 0.5) * b.size[2],
                    ];
                    let cc = b.from_local(local);
                    let cell = (gx * g + gy) * g + gz;
                    let slot = &mut out[(pi * cells + cell) * c..(pi * cells + cell + 1) * c];
                    let mut any = false;
                    for (k, ctr) in feats.centroids.iter().enumerate() {
                        let d2 = (ctr[0] - cc[0]) * (ctr[0] - cc[0])
                            + (ctr[1] - cc[1]) * (ctr[1] - cc[1])
                            + (ctr[2] - cc[2]) * (ctr[2] - cc[2]);
                        if d2 <= rho2 {
                            let row = feats.row(k);
                            if any {
                                for (s, &v) in slot.iter_mut().zip(row) {
                                    *s = s.max(v);
                                }
                            } else {
                                slot.copy_from_slice(row);
                                any = true;
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::new(vec![proposals.len(), cells * c], out).unwrap()
}

/// Per-scale parameter prefix inside the scene-fusion namespace.
pub fn hsfp_prefix(scale: u32) -> String {
    format!("hsfp.x{scale}")
}

/// Run scene fusion for the selected scales and concatenate the pooled
/// blocks per proposal in ascending scale order.
pub fn hsfp(
    levels: &[&SparseVoxelFeatures],
    pyr: &FeaturePyramid,
    cal: &Calibration,
    proposals: &[Proposal],
    store: &ParamStore,
    cfg: &DeformConfig,
    g: usize,
) -> Result<Tensor, TensorError> {
    assert!(!levels.is_empty(), "hsfp needs at least one selected level");
    let mut ordered: Vec<&SparseVoxelFeatures> = levels.to_vec();
    ordered.sort_by_key(|x| x.scale);
    let mut blocks: Vec<Tensor> = Vec::with_capacity(ordered.len());
    for x in ordered {
        let fused = qgslf_block(x, pyr, cal, store, &hsfp_prefix(x.scale), cfg)?;
        blocks.push(roi_grid_pool(&fused, proposals, g));
    }
    let n = proposals.len();
    let total: usize = blocks.iter().map(|b| b.dims()[1]).sum();
    let mut out = vec![0.0f32; n * total];
    for pi in 0..n {
        let mut offset = 0;
        for b in &blocks {
            let w = b.dims()[1];
            out[pi * total + offset..pi * total + offset + w]
                .copy_from_slice(&b.data()[pi * w..(pi + 1) * w]);
            offset += w;
        }
    }
    Tensor::new(vec![n, total], out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::voxel::VoxelFeatures;

    fn vf(entries: &[([i32; 3], [f64; 3], usize, &[f32])]) -> VoxelFeatures {
        let c = entries[0].3.len();
        let mut data = Vec::new();
        let mut coords = Vec::new();
        let mut centroids = Vec::new();
        let mut counts = Vec::new();
        for (cd, ct, n, row) in entries {
            coords.push(*cd);
            centroids.push(*ct);
            counts.push(*n);
            data.extend_from_slice(row);
        }
        VoxelFeatures {
            features: Tensor::new(vec![entries.len(), c], data).unwrap(),
            coords,
            centroids,
            counts,
        }
    }

    fn downsample_store(c_in: usize, c_out: usize, seed: u64) -> ParamStore {
        let mut d = ParamDecl::new();
        declare_downsample_params(&mut d, c_in, c_out).unwrap();
        ParamStore::init(&d, seed)
    }

    #[test]
    fn one_voxel_appears_at_every_level() {
        let v = vf(&[([5, 3, 1], [0.25, 0.15, 0.05], 2, &[1.0, -2.0])]);
        let store = downsample_store(2, 2, 1);
        let levels = multiscale_downsample(&v, &store).unwrap();
        assert_eq!(levels.len(), 4);
        for (i, s) in [1i32, 2, 4, 8].iter().enumerate() {
            assert_eq!(levels[i].len(), 1);
            assert_eq!(levels[i].coords[0], [5 / s, 3 / s, 1 / s]);
            assert_eq!(levels[i].centroids[0], [0.25, 0.15, 0.05]);
        }
        // features differ per level because each level has its own linear
        assert_ne!(levels[0].features.data(), levels[1].features.data());
    }

    #[test]
    fn eight_voxels_merge_into_one_block_at_2x() {
        let rows: Vec<([i32; 3], [f64; 3], usize, Vec<f32>)> = (0..8)
            .map(|i| {
                let c = [(i & 1) as i32, ((i >> 1) & 1) as i32, ((i >> 2) & 1) as i32];
                (
                    c,
                    [c[0] as f64, c[1] as f64, c[2] as f64],
                    1usize,
                    vec![i as f32, -(i as f32)],
                )
            })
            .collect();
        let borrowed: Vec<([i32; 3], [f64; 3], usize, &[f32])> = rows
            .iter()
            .map(|(a, b, c, d)| (*a, *b, *c, d.as_slice()))
            .collect();
        let v = vf(&borrowed);
        let store = downsample_store(2, 2, 1);
        let levels = multiscale_downsample(&v, &store).unwrap();
        assert_eq!(levels[0].len(), 8);
        assert_eq!(levels[1].len(), 1);
        assert_eq!(levels[1].counts[0], 8);
        // count-weighted centroid of unit corners is the cube center
        for a in 0..3 {
            assert!((levels[1].centroids[0][a] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_scene_no_proposals() {
        let anchors = AnchorSet {
            sizes: vec![[3.9, 1.6, 1.56]],
        };
        assert!(heuristic_proposals(&[], &anchors, 5, 0.5).is_empty());
    }

    #[test]
    fn dense_cluster_peaks_at_its_cell() {
        use crate::densify::PointKind;
        let mut pts = Vec::new();
        let mut rng = SplitMix64::new(4);
        for _ in 0..40 {
            pts.push(HybridPoint {
                pos: [
                    10.0 + rng.uniform(-0.2, 0.2),
                    rng.uniform(-0.2, 0.2),
                    0.3,
                ],
                attrs: vec![],
                class_onehot: vec![],
                kind: PointKind::Raw,
                source_instance: None,
            });
        }
        for i in 0..5 {
            pts.push(HybridPoint {
                pos: [20.0 + i as f64 * 3.0, 5.0, 0.0],
                attrs: vec![],
                class_onehot: vec![],
                kind: PointKind::Raw,
                source_instance: None,
            });
        }
        let anchors = AnchorSet {
            sizes: vec![[3.9, 1.6, 1.56], [0.8, 0.6, 1.73]],
        };
        let props = heuristic_proposals(&pts, &anchors, 4, 0.5);
        assert!(!props.is_empty());
        let top = &props[0];
        assert!((top.box3d.center[0] - 10.0).abs() <= 0.5);
        assert!((top.box3d.center[1]).abs() <= 0.5);
        assert!((top.score - 1.0).abs() < 1e-6);
    }

    #[test]
    fn roi_pool_zero_when_no_voxels_near() {
        let feats = SparseVoxelFeatures {
            features: Tensor::new(vec![1, 2], vec![5.0, 6.0]).unwrap(),
            coords: vec![[0, 0, 0]],
            centroids: vec![[100.0, 100.0, 100.0]],
            counts: vec![1],
            scale: 1,
        };
        let p = Proposal {
            box3d: Box3D::new([0.0, 0.0, 0.0], [2.0, 2.0, 2.0], 0.0),
            score: 1.0,
            class: 0,
        };
        let pooled = roi_grid_pool(&feats, &[p], 2);
        assert_eq!(pooled.dims(), &[1, 8 * 2]);
        assert!(pooled.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn roi_pool_voxel_at_cell_center_copies_feature() {
        // G = 1: single cell centered on the box center
        let feats = SparseVoxelFeatures {
            features: Tensor::new(vec![1, 3], vec![1.0, 2.0, 3.0]).unwrap(),
            coords: vec![[0, 0, 0]],
            centroids: vec![[1.0, -2.0, 0.5]],
            counts: vec![1],
            scale: 1,
        };
        let p = Proposal {
            box3d: Box3D::new([1.0, -2.0, 0.5], [2.0, 2.0, 1.0], 0.4),
            score: 1.0,
            class: 0,
        };
        let pooled = roi_grid_pool(&feats, &[p], 1);
        assert_eq!(pooled.data(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn roi_pool_translation_equivariance() {
        let mut rng = SplitMix64::new(21);
        let n = 20;
        let mut centroids = Vec::new();
        let mut data = Vec::new();
        for _ in 0..n {
            centroids.push([
                rng.uniform(-3.0, 3.0),
                rng.uniform(-3.0, 3.0),
                rng.uniform(-1.0, 1.0),
            ]);
            for _ in 0..4 {
                data.push(rng.uniform(-1.0, 1.0) as f32);
            }
        }
        let make = |shift: [f64; 3], centroids: &[[f64; 3]], data: &[f32]| SparseVoxelFeatures {
            features: Tensor::new(vec![n, 4], data.to_vec()).unwrap(),
            coords: vec![[0, 0, 0]; n],
            centroids: centroids
                .iter()
                .map(|c| [c[0] + shift[0], c[1] + shift[1], c[2] + shift[2]])
                .collect(),
            counts: vec![1; n],
            scale: 1,
        };
        let base_box = Box3D::new([0.5, -0.25, 0.0], [3.0, 2.0, 1.5], 0.6);
        let p0 = Proposal {
            box3d: base_box,
            score: 1.0,
            class: 0,
        };
        let shift = [12.5, -7.0, 2.0];
        let p1 = Proposal {
            box3d: Box3D::new(
                [
                    base_box.center[0] + shift[0],
                    base_box.center[1] + shift[1],
                    base_box.center[2] + shift[2],
                ],
                base_box.size,
                base_box.yaw,
            ),
            score: 1.0,
            class: 0,
        };
        let a = roi_grid_pool(&make([0.0; 3], &centroids, &data), &[p0], 3);
        let b = roi_grid_pool(&make(shift, &centroids, &data), &[p1], 3);
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-6);
        }
    }
}
