//! End-to-end orchestration: densify, voxelize, encode, downsample,
//! propose, scene-fuse, proposal-fuse, refine, suppress. Every stage is a
//! pure function of the inputs and the seeded parameter store, so frames
//! can run on any number of workers with bit-identical output.

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};
use crate::io::{csvio, rtf};
use crate::synth::RgbImage;
use radfuse_core::densify::{densify_frame, HybridPoint, InstanceMask, RadarPoint};
use radfuse_core::geometry::Calibration;
use radfuse_core::metrics::Detection;
use radfuse_core::proposal_fusion::{
    detect_head, grid_encode, nms_bev, plfe_fuse, proposal_grid, qgplf_block, RefinedProposal,
};
use radfuse_core::rng::SplitMix64;
use radfuse_core::scene_fusion::{
    heuristic_proposals, hsfp, multiscale_downsample, FeaturePyramid, Proposal, PyramidLevel,
    SparseVoxelFeatures,
};
use radfuse_core::tensor::{ParamStore, Tensor};
use radfuse_core::voxel::{tavfe, voxelize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

/// Configuration plus the initialized parameter store.
pub struct ModelContext {
    pub cfg: PipelineConfig,
    pub store: ParamStore,
}

impl ModelContext {
    pub fn new(cfg: PipelineConfig) -> CliResult<Self> {
        let decl = cfg.declare_params()?;
        let store = ParamStore::init(&decl, cfg.params_seed);
        Ok(Self { cfg, store })
    }
}

/// Everything one frame needs.
#[derive(Clone, Debug)]
pub struct FrameInputs {
    pub points: Vec<RadarPoint>,
    pub mask: InstanceMask,
    pub calibration: Calibration,
    pub pyramid: FeaturePyramid,
}

/// Per-frame outputs plus any requested stage dumps (filename -> bytes).
pub struct FrameResult {
    pub frame_id: u64,
    pub hybrid: Vec<HybridPoint>,
    pub proposals: Vec<Proposal>,
    pub refined: Vec<RefinedProposal>,
    pub detections: Vec<Detection>,
    pub dumps: BTreeMap<String, Vec<u8>>,
}

/// Deterministic pyramid from an RGB image: per level, the stride-patch
/// mean colors pass through a seeded random projection to the configured
/// channel width.
pub fn synth_pyramid(image: &RgbImage, cfg: &PipelineConfig, seed: u64) -> FeaturePyramid {
    let c_out = cfg.fusion.image_channels;
    let levels = cfg
        .fusion
        .strides
        .iter()
        .enumerate()
        .map(|(j, &stride)| {
            let s = stride as usize;
            let h = image.height.div_ceil(s).max(2);
            let w = image.width.div_ceil(s).max(2);
            let mut rng = SplitMix64::keyed(seed, &[0x9a7, j as u64]);
            let proj: Vec<f32> = (0..c_out * 3)
                .map(|_| rng.uniform(-1.0, 1.0) as f32)
                .collect();
            let bias: Vec<f32> = (0..c_out).map(|_| rng.uniform(-0.1, 0.1) as f32).collect();
            let mut data = vec![0.0f32; h * w * c_out];
            for gy in 0..h {
                for gx in 0..w {
                    let mut mean = [0.0f64; 3];
                    let mut count = 0usize;
                    for py in gy * s..((gy + 1) * s).min(image.height) {
                        for px in gx * s..((gx + 1) * s).min(image.width) {
                            let i = (py * image.width + px) * 3;
                            for ch in 0..3 {
                                mean[ch] += image.data[i + ch] as f64 / 255.0;
                            }
                            count += 1;
                        }
                    }
                    if count > 0 {
                        for m in mean.iter_mut() {
                            *m /= count as f64;
                        }
                    }
                    for c in 0..c_out {
                        let mut acc = bias[c] as f64;
                        for ch in 0..3 {
                            acc += proj[c * 3 + ch] as f64 * mean[ch];
                        }
                        data[(gy * w + gx) * c_out + c] = acc as f32;
                    }
                }
            }
            PyramidLevel {
                features: Tensor::new(vec![h, w, c_out], data).expect("level shape"),
                stride,
            }
        })
        .collect();
    FeaturePyramid { levels }
}

fn stage_err(stage: &'static str, frame: u64) -> impl Fn(radfuse_core::error::TensorError) -> CliError {
    move |e| CliError::Stage {
        stage,
        frame,
        detail: e.to_string(),
    }
}

fn wants(dumps: &BTreeSet<String>, stage: &str) -> bool {
    dumps.contains(stage) || dumps.contains("all")
}

/// Run the whole second-stage pipeline on one frame.
pub fn run_frame(
    ctx: &ModelContext,
    inputs: &FrameInputs,
    frame_id: u64,
    dump_stages: &BTreeSet<String>,
) -> CliResult<FrameResult> {
    let cfg = &ctx.cfg;
    let store = &ctx.store;
    let mut dumps: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let schema = cfg.schema()?;

    // point-level densification
    let hybrid = densify_frame(
        &inputs.points,
        &inputs.mask,
        &inputs.calibration,
        &cfg.densify_config()?,
        frame_id,
    )
    .map_err(|e| CliError::Stage {
        stage: "densify",
        frame: frame_id,
        detail: e.to_string(),
    })?;
    if wants(dump_stages, "densify") {
        dumps.insert(
            "densify.csv".into(),
            csvio::hybrid_to_csv(&hybrid, schema.token, schema.n_classes).into_bytes(),
        );
    }

    // voxelization and attention encoding
    let grid = cfg.grid_spec();
    let vs = voxelize(&hybrid, &grid, cfg.grid.max_points_per_voxel);
    if wants(dump_stages, "voxelize") {
        dumps.insert("voxelize.rtf".into(), rtf::to_bytes(&vs.points));
        dumps.insert(
            "voxelize_coords.csv".into(),
            csvio::coords_to_csv(&vs.coords).into_bytes(),
        );
    }
    let encoded = tavfe(&vs, &grid, store, &cfg.tavfe_config())
        .map_err(stage_err("tavfe", frame_id))?;
    if wants(dump_stages, "tavfe") {
        dumps.insert("tavfe.rtf".into(), rtf::to_bytes(&encoded.features));
        dumps.insert(
            "tavfe_coords.csv".into(),
            csvio::coords_to_csv(&encoded.coords).into_bytes(),
        );
    }

    // backbone stand-in
    let levels = multiscale_downsample(&encoded, store).map_err(stage_err("downsample", frame_id))?;
    if wants(dump_stages, "downsample") {
        for l in &levels {
            dumps.insert(
                format!("downsample_x{}.rtf", l.scale),
                rtf::to_bytes(&l.features),
            );
        }
    }

    // proposals
    let proposals = heuristic_proposals(
        &hybrid,
        &cfg.anchor_set(),
        cfg.proposals.count,
        cfg.proposals.bev_cell,
    );
    if wants(dump_stages, "proposals") {
        let as_dets: Vec<Detection> = proposals
            .iter()
            .map(|p| Detection {
                box3d: p.box3d,
                score: p.score,
                class: p.class,
            })
            .collect();
        dumps.insert(
            "proposals.csv".into(),
            csvio::detections_to_csv(&as_dets).into_bytes(),
        );
    }

    let refined = if proposals.is_empty() {
        Vec::new()
    } else {
        // scene fusion over the selected scales
        let selected: Vec<&SparseVoxelFeatures> = cfg
            .selected_scales()
            .iter()
            .map(|&s| {
                levels
                    .iter()
                    .find(|l| l.scale == s)
                    .expect("downsampler emits every scale")
            })
            .collect();
        let deform = cfg.deform_config();
        let f_slp = hsfp(
            &selected,
            &inputs.pyramid,
            &inputs.calibration,
            &proposals,
            store,
            &deform,
            cfg.fusion.roi_grid,
        )
        .map_err(stage_err("hsfp", frame_id))?;
        if wants(dump_stages, "hsfp") {
            dumps.insert("hsfp.rtf".into(), rtf::to_bytes(&f_slp));
        }

        // proposal-level fusion
        let plfe_cfg = cfg.plfe_config();
        let n_g = plfe_cfg.grid.cells();
        let mut plp = vec![0.0f32; proposals.len() * n_g * plfe_cfg.cell_width];
        for (pi, p) in proposals.iter().enumerate() {
            let cells = proposal_grid(p, &hybrid, &plfe_cfg.grid);
            let queries =
                grid_encode(&cells, store, "plfe.grid").map_err(stage_err("plfe", frame_id))?;
            let fused = qgplf_block(
                &queries,
                &cells,
                &inputs.pyramid,
                &inputs.calibration,
                store,
                "plfe.deform",
                &deform,
            )
            .map_err(stage_err("plfe", frame_id))?;
            let w = n_g * plfe_cfg.cell_width;
            plp[pi * w..(pi + 1) * w].copy_from_slice(fused.data());
        }
        let f_plp = Tensor::new(
            vec![proposals.len(), n_g * plfe_cfg.cell_width],
            plp,
        )
        .map_err(stage_err("plfe", frame_id))?;
        let x_p = plfe_fuse(&f_plp, &f_slp, store, &plfe_cfg)
            .map_err(stage_err("plfe", frame_id))?;
        if wants(dump_stages, "plfe") {
            dumps.insert("plfe.rtf".into(), rtf::to_bytes(&x_p));
        }
        detect_head(&x_p, &proposals, store).map_err(stage_err("head", frame_id))?
    };

    // decode and suppress
    let decoded: Vec<(radfuse_core::boxes::Box3D, f32, usize)> = refined
        .iter()
        .map(|r| (r.decoded(), r.confidence, r.base.class))
        .collect();
    let kept = nms_bev(&decoded, cfg.proposals.nms_iou);
    let detections: Vec<Detection> = kept
        .iter()
        .map(|&i| Detection {
            box3d: decoded[i].0,
            score: decoded[i].1,
            class: decoded[i].2,
        })
        .collect();
    if wants(dump_stages, "detections") {
        dumps.insert(
            "detections.csv".into(),
            csvio::detections_to_csv(&detections).into_bytes(),
        );
    }

    Ok(FrameResult {
        frame_id,
        hybrid,
        proposals,
        refined,
        detections,
        dumps,
    })
}

/// Run frames on a worker pool; results return in frame order and are
/// bit-identical for any worker count.
pub fn run_frames(
    ctx: &ModelContext,
    frames: &[(u64, FrameInputs)],
    workers: usize,
    dump_stages: &BTreeSet<String>,
) -> CliResult<Vec<FrameResult>> {
    let workers = workers.max(1).min(frames.len().max(1));
    if workers <= 1 {
        return frames
            .iter()
            .map(|(id, inputs)| run_frame(ctx, inputs, *id, dump_stages))
            .collect();
    }
    let slots: Mutex<Vec<Option<CliResult<FrameResult>>>> =
        Mutex::new((0..frames.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for w in 0..workers {
            let slots = &slots;
            scope.spawn(move || {
                for (i, (id, inputs)) in frames.iter().enumerate() {
                    if i % workers != w {
                        continue;
                    }
                    let r = run_frame(ctx, inputs, *id, dump_stages);
                    slots.lock().unwrap()[i] = Some(r);
                }
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every frame slot filled"))
        .collect()
}
