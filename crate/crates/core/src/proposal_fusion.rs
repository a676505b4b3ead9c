//! Proposal-level fusion: each proposal is discretized into a grid of cells
//! whose encoded geometry queries the image pyramid through deformable
//! attention; the flattened cell features fuse with the pooled scene
//! features through a two-token self-attention layer; a small head predicts
//! box residuals and confidence.

use crate::boxes::{wrap_angle, Box3D};
use crate::densify::HybridPoint;
use crate::error::TensorError;
use crate::geometry::{self, Calibration, Projected};
use crate::scene_fusion::{deform_attend, DeformConfig, DeformParams, FeaturePyramid, Proposal};
use crate::tensor::{
    declare_ffn, ffn, linear, relu, sigmoid_scalar, softmax_over, FfnParams, ParamDecl,
    ParamStore, Tensor,
};
use alloc::vec;
use alloc::vec::Vec;

/// Proposal grid resolution (defaults to 6x6x6).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridDims {
    pub d: [usize; 3],
}

impl GridDims {
    pub fn cells(&self) -> usize {
        self.d[0] * self.d[1] * self.d[2]
    }
}

impl Default for GridDims {
    fn default() -> Self {
        Self { d: [6, 6, 6] }
    }
}

/// One proposal grid cell: world-frame geometric center and point centroid
/// (the centroid falls back to the center when the cell holds no points).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell {
    pub center: [f64; 3],
    pub centroid: [f64; 3],
}

/// Discretize a proposal into `d1 * d2 * d3` cells, flattened with x
/// outermost and z fastest, and compute each cell's point centroid from the
/// hybrid points inside the box.
pub fn proposal_grid(p: &Proposal, points: &[HybridPoint], dims: &GridDims) -> Vec<GridCell> {
    let b = &p.box3d;
    let d = dims.d;
    let n = dims.cells();
    let mut sums = vec![[0.0f64; 3]; n];
    let mut counts = vec![0usize; n];
    for pt in points {
        let local = b.to_local(pt.pos);
        let mut idx = [0usize; 3];
        let mut inside = true;
        for a in 0..3 {
            let half = b.size[a] / 2.0;
            if local[a] < -half || local[a] > half {
                inside = false;
                break;
            }
            let t = (local[a] / b.size[a] + 0.5) * d[a] as f64;
            idx[a] = (libm::floor(t) as i64).clamp(0, d[a] as i64 - 1) as usize;
        }
        if inside {
            let cell = (idx[0] * d[1] + idx[1]) * d[2] + idx[2];
            for a in 0..3 {
                sums[cell][a] += pt.pos[a];
            }
            counts[cell] += 1;
        }
    }
    let mut out = Vec::with_capacity(n);
    for gx in 0..d[0] {
        for gy in 0..d[1] {
            for gz in 0..d[2] {
                let cell = (gx * d[1] + gy) * d[2] + gz;
                let local = [
                    ((gx as f64 + 0.5) / d[0] as f64 - 0.5) * b.size[0],
                    ((gy as f64 + 0.5) / d[1] as f64 - 0.5) * b.size[1],
                    ((gz as f64 + 0.5) / d[2] as f64 - 0.5) * b.size[2],
                ];
                let center = b.from_local(local);
                let centroid = if counts[cell] > 0 {
                    [
                        sums[cell][0] / counts[cell] as f64,
                        sums[cell][1] / counts[cell] as f64,
                        sums[cell][2] / counts[cell] as f64,
                    ]
                } else {
                    center
                };
                out.push(GridCell { center, centroid });
            }
        }
    }
    out
}

/// Encode cells into query features: `FFN(concat(t_grid, c_grid))`.
pub fn grid_encode(
    cells: &[GridCell],
    store: &ParamStore,
    prefix: &str,
) -> Result<Tensor, TensorError> {
    let p = FfnParams::fetch(store, prefix)?;
    let c_out = p.fc2.fan_out();
    let mut out = vec![0.0f32; cells.len() * c_out];
    for (i, cell) in cells.iter().enumerate() {
        let f = Tensor::from_vec(vec![
            cell.center[0] as f32,
            cell.center[1] as f32,
            cell.center[2] as f32,
            cell.centroid[0] as f32,
            cell.centroid[1] as f32,
            cell.centroid[2] as f32,
        ]);
        let y = ffn(&f, &p)?;
        out[i * c_out..(i + 1) * c_out].copy_from_slice(y.data());
    }
    Tensor::new(vec![cells.len(), c_out], out)
}

/// Fuse grid-cell queries with the image pyramid; mirrors the scene-level
/// block with the cell's geometric center as the reference point.
pub fn qgplf_block(
    queries: &Tensor,
    cells: &[GridCell],
    pyr: &FeaturePyramid,
    cal: &Calibration,
    store: &ParamStore,
    prefix: &str,
    cfg: &DeformConfig,
) -> Result<Tensor, TensorError> {
    let params = DeformParams::fetch(store, prefix)?;
    let c = queries.dims()[1];
    let n = cells.len();
    let mut out = vec![0.0f32; n * c];
    for (k, cell) in cells.iter().enumerate() {
        let q = &queries.data()[k * c..(k + 1) * c];
        let reference = match geometry::project(cell.center, cal) {
            Projected::Pixel { u, v, .. } => Some((u, v)),
            Projected::Dropped => None,
        };
        let att = deform_attend(q, reference, pyr, &params, cfg)?;
        let mut cat = Vec::with_capacity(2 * c);
        cat.extend_from_slice(q);
        cat.extend_from_slice(&att.enhanced);
        let fused = ffn(&Tensor::from_vec(cat), &params.fuse)?;
        out[k * c..(k + 1) * c].copy_from_slice(fused.data());
    }
    Tensor::new(vec![n, c], out)
}

/// Width knobs of the proposal-level stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlfeConfig {
    pub grid: GridDims,
    /// Grid-cell query width.
    pub cell_width: usize,
    /// Hidden width of the grid-encode FFN.
    pub grid_hidden: usize,
    /// Common token width for the fusion self-attention.
    pub token_width: usize,
    /// Heads of the fusion self-attention.
    pub heads: usize,
    /// Hidden width of the shared detection-head MLP.
    pub head_hidden: usize,
}

impl Default for PlfeConfig {
    fn default() -> Self {
        Self {
            grid: GridDims::default(),
            cell_width: 32,
            grid_hidden: 32,
            token_width: 64,
            heads: 4,
            head_hidden: 256,
        }
    }
}

/// Declare all proposal-stage parameters. `slp_width` is the width of the
/// pooled scene feature rows.
pub fn declare_plfe_params(
    decl: &mut ParamDecl,
    cfg: &PlfeConfig,
    deform: &DeformConfig,
    n_levels: usize,
    c_img: usize,
    slp_width: usize,
) -> Result<(), TensorError> {
    declare_ffn(decl, "plfe.grid", 6, cfg.grid_hidden, cfg.cell_width)?;
    crate::scene_fusion::declare_deform_params(
        decl,
        "plfe.deform",
        cfg.cell_width,
        c_img,
        deform,
        n_levels,
        2 * cfg.cell_width,
    )?;
    let plp_width = cfg.grid.cells() * cfg.cell_width;
    decl.linear("plfe.fuse.proj_plp", plp_width, cfg.token_width)?;
    decl.linear("plfe.fuse.proj_slp", slp_width, cfg.token_width)?;
    for leaf in ["q", "k", "v", "out"] {
        decl.linear(&crate::tensor::join("plfe.msa", leaf), cfg.token_width, cfg.token_width)?;
    }
    decl.layer_norm("plfe.msa.ln", cfg.token_width)?;
    decl.linear("head.fc1", 2 * cfg.token_width, cfg.head_hidden)?;
    decl.linear("head.fc2", cfg.head_hidden, cfg.head_hidden)?;
    decl.linear("head.reg", cfg.head_hidden, 7)?;
    decl.linear("head.conf", cfg.head_hidden, 1)?;
    Ok(())
}

/// Two-token multi-head self-attention with residual and LayerNorm.
///
/// Returns the two output tokens and the softmax attention `[heads, 2, 2]`
/// (rows sum to 1).
pub fn msa_two_token(
    t1: &[f32],
    t2: &[f32],
    store: &ParamStore,
    heads: usize,
) -> Result<(Vec<f32>, Vec<f32>, Tensor), TensorError> {
    let d = t1.len();
    if t2.len() != d {
        return Err(TensorError::ShapeMismatch {
            context: "msa token width",
            expected: d,
            got: t2.len(),
        });
    }
    if d % heads != 0 {
        return Err(TensorError::ShapeMismatch {
            context: "msa head split",
            expected: heads,
            got: d,
        });
    }
    let wq = store.get("plfe.msa.q")?;
    let wk = store.get("plfe.msa.k")?;
    let wv = store.get("plfe.msa.v")?;
    let wo = store.get("plfe.msa.out")?;
    let ln = store.get("plfe.msa.ln")?;
    let dk = d / heads;
    let tokens = [t1, t2];
    let proj = |p: &crate::tensor::Param, t: &[f32]| -> Result<Vec<f32>, TensorError> {
        Ok(linear(&Tensor::from_vec(t.to_vec()), p)?.into_data())
    };
    let q: Vec<Vec<f32>> = tokens.iter().map(|t| proj(wq, t)).collect::<Result<_, _>>()?;
    let k: Vec<Vec<f32>> = tokens.iter().map(|t| proj(wk, t)).collect::<Result<_, _>>()?;
    let v: Vec<Vec<f32>> = tokens.iter().map(|t| proj(wv, t)).collect::<Result<_, _>>()?;

    let scale = 1.0 / libm::sqrt(dk as f64);
    let mut logits = vec![0.0f32; heads * 2 * 2];
    for h in 0..heads {
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0f64;
                for r in 0..dk {
                    acc += q[i][h * dk + r] as f64 * k[j][h * dk + r] as f64;
                }
                logits[(h * 2 + i) * 2 + j] = (acc * scale) as f32;
            }
        }
    }
    let attn = softmax_over(&Tensor::new(vec![heads, 2, 2], logits)?, &[2])?;

    let mut outs: Vec<Vec<f32>> = Vec::with_capacity(2);
    for i in 0..2 {
        let mut mixed = vec![0.0f32; d];
        for h in 0..heads {
            for r in 0..dk {
                let mut acc = 0.0f64;
                for j in 0..2 {
                    acc += attn.at(&[h, i, j]) as f64 * v[j][h * dk + r] as f64;
                }
                mixed[h * dk + r] = acc as f32;
            }
        }
        let projected = linear(&Tensor::from_vec(mixed), wo)?;
        // residual + LayerNorm
        let residual: Vec<f32> = tokens[i]
            .iter()
            .zip(projected.data())
            .map(|(a, b)| a + b)
            .collect();
        let normed = crate::tensor::layer_norm(&Tensor::from_vec(residual), ln)?;
        outs.push(normed.into_data());
    }
    let t2_out = outs.pop().unwrap();
    let t1_out = outs.pop().unwrap();
    Ok((t1_out, t2_out, attn))
}

/// Fuse proposal-level and pooled scene-level features.
///
/// Each row of both inputs projects to the common token width; the two
/// tokens pass one multi-head self-attention layer with residual and
/// LayerNorm; the output tokens concatenate to a `2 * token_width` row.
pub fn plfe_fuse(
    f_plp: &Tensor,
    f_slp: &Tensor,
    store: &ParamStore,
    cfg: &PlfeConfig,
) -> Result<Tensor, TensorError> {
    let n = f_plp.dims()[0];
    if f_slp.dims()[0] != n {
        return Err(TensorError::ShapeMismatch {
            context: "plfe_fuse row count",
            expected: n,
            got: f_slp.dims()[0],
        });
    }
    let proj_plp = store.get("plfe.fuse.proj_plp")?;
    let proj_slp = store.get("plfe.fuse.proj_slp")?;
    let d = cfg.token_width;
    let wp = f_plp.dims()[1];
    let ws = f_slp.dims()[1];
    let mut out = vec![0.0f32; n * 2 * d];
    for i in 0..n {
        let rp = Tensor::from_vec(f_plp.data()[i * wp..(i + 1) * wp].to_vec());
        let rs = Tensor::from_vec(f_slp.data()[i * ws..(i + 1) * ws].to_vec());
        let t1 = linear(&rp, proj_plp)?.into_data();
        let t2 = linear(&rs, proj_slp)?.into_data();
        let (o1, o2, _) = msa_two_token(&t1, &t2, store, cfg.heads)?;
        out[i * 2 * d..i * 2 * d + d].copy_from_slice(&o1);
        out[i * 2 * d + d..(i + 1) * 2 * d].copy_from_slice(&o2);
    }
    Tensor::new(vec![n, 2 * d], out)
}

/// A refined proposal: base box, predicted residual, and confidence.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinedProposal {
    pub base: Proposal,
    /// `(dx, dy, dz, dl, dw, dh, dyaw)`.
    pub residual: [f32; 7],
    pub confidence: f32,
}

impl RefinedProposal {
    /// Decode: additive world-frame center and yaw, multiplicative
    /// `exp(residual)` sizes, yaw wrapped back into (-pi, pi].
    pub fn decoded(&self) -> Box3D {
        decode_residual(&self.base.box3d, &self.residual)
    }
}

pub fn decode_residual(base: &Box3D, r: &[f32; 7]) -> Box3D {
    Box3D::new(
        [
            base.center[0] + r[0] as f64,
            base.center[1] + r[1] as f64,
            base.center[2] + r[2] as f64,
        ],
        [
            base.size[0] * libm::exp(r[3] as f64),
            base.size[1] * libm::exp(r[4] as f64),
            base.size[2] * libm::exp(r[5] as f64),
        ],
        wrap_angle(base.yaw + r[6] as f64),
    )
}

/// Inverse of [`decode_residual`]; the companion used by tests and by any
/// training-side tooling.
pub fn encode_residual(gt: &Box3D, base: &Box3D) -> [f32; 7] {
    [
        (gt.center[0] - base.center[0]) as f32,
        (gt.center[1] - base.center[1]) as f32,
        (gt.center[2] - base.center[2]) as f32,
        libm::log(gt.size[0] / base.size[0]) as f32,
        libm::log(gt.size[1] / base.size[1]) as f32,
        libm::log(gt.size[2] / base.size[2]) as f32,
        wrap_angle(gt.yaw - base.yaw) as f32,
    ]
}

/// Shared two-layer MLP, then parallel regression and confidence branches.
pub fn detect_head(
    x_p: &Tensor,
    proposals: &[Proposal],
    store: &ParamStore,
) -> Result<Vec<RefinedProposal>, TensorError> {
    let fc1 = store.get("head.fc1")?;
    let fc2 = store.get("head.fc2")?;
    let reg = store.get("head.reg")?;
    let conf = store.get("head.conf")?;
    let n = x_p.dims()[0];
    debug_assert_eq!(n, proposals.len());
    let w = x_p.dims()[1];
    let mut out = Vec::with_capacity(n);
    for (i, p) in proposals.iter().enumerate() {
        let row = Tensor::from_vec(x_p.data()[i * w..(i + 1) * w].to_vec());
        let hidden = relu(&linear(&relu(&linear(&row, fc1)?), fc2)?);
        let r = linear(&hidden, reg)?;
        let c = linear(&hidden, conf)?;
        let mut residual = [0.0f32; 7];
        residual.copy_from_slice(r.data());
        out.push(RefinedProposal {
            base: p.clone(),
            residual,
            confidence: sigmoid_scalar(c.data()[0]),
        });
    }
    Ok(out)
}

/// Score-sorted per-class BEV-IoU suppression (plumbing after the head).
pub fn nms_bev(dets: &[(Box3D, f32, usize)], iou_threshold: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].1.total_cmp(&dets[a].1).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let mut suppressed = false;
        for &j in &kept {
            if dets[j].2 == dets[i].2
                && crate::metrics::bev_iou(&dets[j].0, &dets[i].0) > iou_threshold
            {
                suppressed = true;
                break;
            }
        }
        if !suppressed {
            kept.push(i);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densify::PointKind;
    use crate::rng::SplitMix64;

    fn prop(center: [f64; 3], size: [f64; 3], yaw: f64) -> Proposal {
        Proposal {
            box3d: Box3D::new(center, size, yaw),
            score: 0.9,
            class: 0,
        }
    }

    fn hp(pos: [f64; 3]) -> HybridPoint {
        HybridPoint {
            pos,
            attrs: vec![],
            class_onehot: vec![],
            kind: PointKind::Raw,
            source_instance: None,
        }
    }

    #[test]
    fn empty_cell_centroid_falls_back_to_center() {
        let p = prop([0.0, 0.0, 0.0], [2.0, 2.0, 2.0], 0.0);
        let cells = proposal_grid(&p, &[], &GridDims { d: [2, 2, 2] });
        assert_eq!(cells.len(), 8);
        for c in &cells {
            assert_eq!(c.center, c.centroid);
        }
    }

    #[test]
    fn one_point_in_a_cell_is_its_centroid() {
        let p = prop([0.0, 0.0, 0.0], [2.0, 2.0, 2.0], 0.0);
        let pt = [0.6, 0.6, 0.6];
        let cells = proposal_grid(&p, &[hp(pt)], &GridDims { d: [2, 2, 2] });
        // cell (1,1,1) is flattened last
        let c = &cells[7];
        assert_eq!(c.centroid, pt);
        assert_ne!(c.center, c.centroid);
    }

    #[test]
    fn rotated_grid_cell_centers_stay_inside_box() {
        let p = prop([5.0, -3.0, 1.0], [4.0, 2.0, 1.5], core::f64::consts::PI / 4.0);
        let cells = proposal_grid(&p, &[], &GridDims::default());
        assert_eq!(cells.len(), 216);
        for c in &cells {
            assert!(p.box3d.contains(c.center));
        }
    }

    #[test]
    fn residual_round_trip() {
        let mut rng = SplitMix64::new(33);
        for _ in 0..200 {
            let base = Box3D::new(
                [rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0), rng.uniform(-2.0, 2.0)],
                [rng.uniform(0.5, 6.0), rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)],
                rng.uniform(-3.1, 3.1),
            );
            let gt = Box3D::new(
                [
                    base.center[0] + rng.uniform(-1.0, 1.0),
                    base.center[1] + rng.uniform(-1.0, 1.0),
                    base.center[2] + rng.uniform(-0.5, 0.5),
                ],
                [
                    base.size[0] * rng.uniform(0.7, 1.4),
                    base.size[1] * rng.uniform(0.7, 1.4),
                    base.size[2] * rng.uniform(0.7, 1.4),
                ],
                rng.uniform(-3.1, 3.1),
            );
            let dec = decode_residual(&base, &encode_residual(&gt, &base));
            for a in 0..3 {
                assert!((dec.center[a] - gt.center[a]).abs() < 1e-5);
                assert!((dec.size[a] - gt.size[a]).abs() < 1e-5 * gt.size[a].max(1.0));
            }
            let dy = wrap_angle(dec.yaw - gt.yaw).abs();
            assert!(dy < 1e-5, "yaw mismatch {dy}");
            assert!(dec.size.iter().all(|&s| s > 0.0));
        }
    }

    fn plfe_store(cfg: &PlfeConfig, slp_width: usize, seed: u64) -> ParamStore {
        let mut d = ParamDecl::new();
        declare_plfe_params(
            &mut d,
            cfg,
            &DeformConfig { heads: 2, points: 2 },
            2,
            8,
            slp_width,
        )
        .unwrap();
        ParamStore::init(&d, seed)
    }

    #[test]
    fn msa_zero_weights_residual_trace() {
        let cfg = PlfeConfig {
            token_width: 8,
            heads: 2,
            ..PlfeConfig::default()
        };
        let mut store = plfe_store(&cfg, 16, 3);
        for leaf in ["plfe.msa.q", "plfe.msa.k", "plfe.msa.v", "plfe.msa.out"] {
            store.zero_out(leaf);
        }
        let t1: Vec<f32> = (0..8).map(|i| i as f32 * 0.25 - 1.0).collect();
        let t2: Vec<f32> = (0..8).map(|i| -(i as f32) * 0.1 + 0.3).collect();
        let (o1, o2, attn) = msa_two_token(&t1, &t2, &store, 2).unwrap();
        let ln = store.get("plfe.msa.ln").unwrap();
        let e1 = crate::tensor::layer_norm(&Tensor::from_vec(t1.clone()), ln).unwrap();
        let e2 = crate::tensor::layer_norm(&Tensor::from_vec(t2.clone()), ln).unwrap();
        assert_eq!(o1, e1.data());
        assert_eq!(o2, e2.data());
        // attention rows sum to 1 (uniform here)
        for h in 0..2 {
            for i in 0..2 {
                let s = attn.at(&[h, i, 0]) + attn.at(&[h, i, 1]);
                assert!((s - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn plfe_fuse_shapes_and_row_mismatch() {
        let cfg = PlfeConfig {
            token_width: 8,
            heads: 2,
            cell_width: 4,
            ..PlfeConfig::default()
        };
        let plp_width = cfg.grid.cells() * cfg.cell_width;
        let store = plfe_store(&cfg, 16, 5);
        let n = 3;
        let f_plp = Tensor::new(vec![n, plp_width], vec![0.1; n * plp_width]).unwrap();
        let f_slp = Tensor::new(vec![n, 16], vec![0.2; n * 16]).unwrap();
        let x = plfe_fuse(&f_plp, &f_slp, &store, &cfg).unwrap();
        assert_eq!(x.dims(), &[n, 16]);
        let bad = Tensor::new(vec![2, 16], vec![0.0; 32]).unwrap();
        assert!(matches!(
            plfe_fuse(&f_plp, &bad, &store, &cfg),
            Err(TensorError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn zero_head_weights_keep_base_box() {
        let cfg = PlfeConfig {
            token_width: 8,
            heads: 2,
            ..PlfeConfig::default()
        };
        let mut store = plfe_store(&cfg, 16, 7);
        store.zero_out("head.reg");
        store.zero_out("head.conf");
        let p = prop([3.0, 1.0, 0.2], [3.9, 1.6, 1.56], 0.3);
        let x = Tensor::new(vec![1, 16], vec![0.5; 16]).unwrap();
        let refined = detect_head(&x, core::slice::from_ref(&p), &store).unwrap();
        assert_eq!(refined.len(), 1);
        assert_eq!(refined[0].residual, [0.0; 7]);
        assert_eq!(refined[0].confidence, 0.5);
        let d = refined[0].decoded();
        assert_eq!(d, p.box3d);
    }

    #[test]
    fn confidence_strictly_inside_unit_interval() {
        let cfg = PlfeConfig {
            token_width: 8,
            heads: 2,
            ..PlfeConfig::default()
        };
        let store = plfe_store(&cfg, 16, 11);
        let p = prop([3.0, 1.0, 0.2], [3.9, 1.6, 1.56], 0.3);
        let mut rng = SplitMix64::new(2);
        for _ in 0..20 {
            let x = Tensor::new(
                vec![1, 16],
                (0..16).map(|_| rng.uniform(-5.0, 5.0) as f32).collect(),
            )
            .unwrap();
            let r = detect_head(&x, core::slice::from_ref(&p), &store).unwrap();
            assert!(r[0].confidence > 0.0 && r[0].confidence < 1.0);
            assert!(r[0].decoded().size.iter().all(|&s| s > 0.0));
        }
    }

    #[test]
    fn nms_suppresses_same_class_overlaps() {
        let a = Box3D::new([0.0, 0.0, 0.0], [4.0, 2.0, 1.5], 0.0);
        let b = Box3D::new([0.3, 0.0, 0.0], [4.0, 2.0, 1.5], 0.0);
        let c = Box3D::new([20.0, 0.0, 0.0], [4.0, 2.0, 1.5], 0.0);
        let kept = nms_bev(&[(a, 0.9, 0), (b, 0.8, 0), (c, 0.7, 0)], 0.1);
        assert_eq!(kept, vec![0, 2]);
        // different class survives
        let kept = nms_bev(&[(a, 0.9, 0), (b, 0.8, 1)], 0.1);
        assert_eq!(kept, vec![0, 1]);
    }
}
