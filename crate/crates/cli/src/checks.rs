//! Invariant suite: a fast, named re-run of every module's contracts,
//! emitted as machine-readable JSON. `fault` perturbs the named check's
//! observed value before the assertion, as a negative control that the
//! harness actually fails and names the check.

use crate::config::PipelineConfig;
use crate::pipeline::{run_frames, synth_pyramid, FrameInputs, ModelContext};
use crate::synth::synth_scene;
use radfuse_core::boxes::Box3D;
use radfuse_core::densify::{densify_frame, filter_foreground, PointKind};
use radfuse_core::geometry::{project, reproject, Projected};
use radfuse_core::metrics::{average_precision, bev_iou, default_classes, Detection,
                            GroundTruthBox, IouKind};
use radfuse_core::rng::SplitMix64;
use radfuse_core::scene_fusion::{declare_deform_params, deform_attend, DeformConfig,
                                 DeformParams, FeaturePyramid, PyramidLevel};
use radfuse_core::tensor::jvp::{jvp_check, JvpOp};
use radfuse_core::tensor::{
    declare_ffn, sigmoid_scalar, softmax_over, FfnParams, ParamDecl, ParamStore, Tensor,
};
use serde_json::json;
use std::collections::BTreeSet;

pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub struct CheckReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn to_json(&self) -> String {
        let checks: Vec<serde_json::Value> = self
            .outcomes
            .iter()
            .map(|o| {
                json!({
                    "name": o.name,
                    "status": if o.passed { "pass" } else { "fail" },
                    "detail": o.detail,
                })
            })
            .collect();
        serde_json::to_string_pretty(&json!({
            "passed": self.passed(),
            "checks": checks,
        }))
        .expect("report serializes")
    }
}

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    fault: Option<&'a str>,
}

impl<'a> Ctx<'a> {
    /// Negative-control hook: nudges a check's observed value when the
    /// fault matches its name.
    fn perturb(&self, check: &str, value: f64) -> f64 {
        if self.fault == Some(check) {
            value + 0.01
        } else {
            value
        }
    }
}

type CheckFn = fn(&Ctx<'_>) -> Result<String, String>;

fn geometry_round_trip(c: &Ctx<'_>) -> Result<String, String> {
    let cal = crate::synth::synth_scene(1, 0, 1, "vod7").calibration;
    let mut rng = SplitMix64::new(77);
    let mut worst = 0.0f64;
    let mut tested = 0;
    while tested < 2000 {
        let p = [
            rng.uniform(0.5, 50.0),
            rng.uniform(-25.0, 25.0),
            rng.uniform(-3.0, 2.0),
        ];
        if let Projected::Pixel { u, v, d } = project(p, &cal) {
            let q = reproject(u, v, d, &cal).map_err(|e| e.to_string())?;
            let err =
                ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2) + (q[2] - p[2]).powi(2)).sqrt();
            worst = worst.max(c.perturb("geometry_round_trip", err));
            tested += 1;
        }
    }
    if worst < 1e-6 {
        Ok(format!("max error {worst:.2e} m over 2000 points"))
    } else {
        Err(format!("round-trip error {worst:.2e} m exceeds 1e-6"))
    }
}

fn softmax_normalization(c: &Ctx<'_>) -> Result<String, String> {
    let mut rng = SplitMix64::new(3);
    for _ in 0..50 {
        let x = Tensor::new(
            vec![4, 5],
            (0..20).map(|_| rng.uniform(-6.0, 6.0) as f32).collect(),
        )
        .unwrap();
        let y = softmax_over(&x, &[1]).map_err(|e| e.to_string())?;
        for r in 0..4 {
            let s: f64 = y.data()[r * 5..(r + 1) * 5].iter().map(|&v| v as f64).sum();
            let s = c.perturb("softmax_normalization", s);
            if (s - 1.0).abs() > 1e-6 {
                return Err(format!("slice sums to {s}"));
            }
        }
    }
    Ok("all slices sum to 1 within 1e-6".into())
}

fn sigmoid_symmetry(c: &Ctx<'_>) -> Result<String, String> {
    let mut rng = SplitMix64::new(4);
    for _ in 0..500 {
        let x = rng.uniform(-10.0, 10.0) as f32;
        let s = c.perturb(
            "sigmoid_symmetry",
            (sigmoid_scalar(x) + sigmoid_scalar(-x)) as f64,
        );
        if (s - 1.0).abs() > 1e-6 {
            return Err(format!("sigmoid({x}) + sigmoid({}) = {s}", -x));
        }
    }
    Ok("sigmoid(x) + sigmoid(-x) = 1 within 1e-6".into())
}

fn init_determinism(_c: &Ctx<'_>) -> Result<String, String> {
    let mut d = ParamDecl::new();
    d.linear("a", 16, 8).map_err(|e| e.to_string())?;
    declare_ffn(&mut d, "f", 8, 16, 8).map_err(|e| e.to_string())?;
    let s1 = ParamStore::init(&d, 99);
    let s2 = ParamStore::init(&d, 99);
    for p in s1.paths() {
        if s1.get(p).unwrap() != s2.get(p).unwrap() {
            return Err(format!("parameter '{p}' differs across identical seeds"));
        }
    }
    Ok("stores bit-identical across identical seeds".into())
}

fn densify_counts(c: &Ctx<'_>) -> Result<String, String> {
    let scene = synth_scene(5, 3, 0, "vod7");
    let cfg = PipelineConfig::default();
    let dc = cfg.densify_config().map_err(|e| e.to_string())?;
    let fg = filter_foreground(&scene.points, &scene.mask, &scene.calibration);
    let hybrid = densify_frame(&scene.points, &scene.mask, &scene.calibration, &dc, 5)
        .map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (&id, set) in &fg {
        if set.len() < 4 {
            continue;
        }
        let n = hybrid
            .iter()
            .filter(|h| h.source_instance == Some(id))
            .count();
        let n = c.perturb("densify_counts", n as f64) as usize;
        // qualifying instances may still lack an uncovered uniform region
        if n != 5 * dc.sampler.tau && n != dc.sampler.tau {
            return Err(format!("instance {id}: {n} virtual points"));
        }
        checked += 1;
    }
    Ok(format!("{checked} qualifying instances at tau/5tau counts"))
}

fn depth_copy(c: &Ctx<'_>) -> Result<String, String> {
    let scene = synth_scene(6, 3, 0, "vod7");
    let cfg = PipelineConfig::default();
    let dc = cfg.densify_config().map_err(|e| e.to_string())?;
    let fg = filter_foreground(&scene.points, &scene.mask, &scene.calibration);
    let hybrid = densify_frame(&scene.points, &scene.mask, &scene.calibration, &dc, 6)
        .map_err(|e| e.to_string())?;
    for h in hybrid.iter().filter(|h| h.kind == PointKind::Virtual) {
        let src = h.source_instance.unwrap();
        let Projected::Pixel { d, .. } = project(h.pos, &scene.calibration) else {
            return Err("virtual point projects behind camera".into());
        };
        let d = c.perturb("depth_copy", d);
        let gap = fg[&src]
            .iter()
            .map(|f| (f.d - d).abs())
            .fold(f64::INFINITY, f64::min);
        if gap > 1e-6 {
            return Err(format!("depth {d} is no foreground copy (gap {gap:.2e})"));
        }
    }
    Ok("every virtual depth is a foreground copy".into())
}

fn attention_sums(c: &Ctx<'_>) -> Result<String, String> {
    let deform = DeformConfig { heads: 4, points: 4 };
    let mut decl = ParamDecl::new();
    declare_deform_params(&mut decl, "blk", 32, 8, &deform, 5, 64).map_err(|e| e.to_string())?;
    let store = ParamStore::init(&decl, 13);
    let params = DeformParams::fetch(&store, "blk").map_err(|e| e.to_string())?;
    let mut rng = SplitMix64::new(6);
    let levels = (0..5)
        .map(|j| PyramidLevel {
            features: Tensor::zeros(&[8, 8, 8]),
            stride: (4 << j) as f64,
        })
        .collect();
    let pyr = FeaturePyramid { levels };
    for _ in 0..20 {
        let q: Vec<f32> = (0..32).map(|_| rng.uniform(-2.0, 2.0) as f32).collect();
        let out = deform_attend(&q, Some((20.0, 20.0)), &pyr, &params, &deform)
            .map_err(|e| e.to_string())?;
        for m in 0..4 {
            let s: f64 = out.attn.data()[m * 20..(m + 1) * 20]
                .iter()
                .map(|&v| v as f64)
                .sum();
            let s = c.perturb("attention_sums", s);
            if (s - 1.0).abs() > 1e-6 {
                return Err(format!("head {m} sums to {s}"));
            }
        }
    }
    Ok("per-head weights sum to 1 within 1e-6".into())
}

fn jvp_suite(_c: &Ctx<'_>) -> Result<String, String> {
    let mut d = ParamDecl::new();
    d.linear("w", 6, 4).map_err(|e| e.to_string())?;
    declare_ffn(&mut d, "f", 6, 8, 4).map_err(|e| e.to_string())?;
    let store = ParamStore::init(&d, 31);
    let mut rng = SplitMix64::new(17);
    let mut rand_vec = |n: usize, scale: f64| -> Tensor {
        Tensor::from_vec((0..n).map(|_| rng.uniform(-scale, scale) as f32).collect())
    };
    for _ in 0..10 {
        let x = rand_vec(6, 2.0);
        let v = rand_vec(6, 1.0);
        let r = jvp_check(&JvpOp::Linear(store.get("w").unwrap()), &x, &v)
            .map_err(|e| e.to_string())?;
        if !r.passed() {
            return Err(format!("linear jvp rel err {}", r.max_rel_err));
        }
        let r = jvp_check(&JvpOp::Sigmoid, &x, &v).map_err(|e| e.to_string())?;
        if !r.passed() {
            return Err(format!("sigmoid jvp rel err {}", r.max_rel_err));
        }
        let r = jvp_check(&JvpOp::SoftmaxGroups(6), &x, &v).map_err(|e| e.to_string())?;
        if !r.passed() {
            return Err(format!("softmax jvp rel err {}", r.max_rel_err));
        }
        let p = FfnParams::fetch(&store, "f").map_err(|e| e.to_string())?;
        let r = jvp_check(&JvpOp::Ffn(p), &x, &v).map_err(|e| e.to_string())?;
        if !r.kink && r.max_rel_err >= 1e-4 {
            return Err(format!("ffn jvp rel err {}", r.max_rel_err));
        }
    }
    Ok("linear/sigmoid/softmax/ffn directional derivatives pass".into())
}

fn iou_analytic(c: &Ctx<'_>) -> Result<String, String> {
    let a = Box3D::new([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], 0.0);
    let b = Box3D::new([0.5, 0.0, 0.0], [1.0, 1.0, 1.0], 0.0);
    let got = c.perturb("iou_analytic", bev_iou(&a, &b));
    if (got - 1.0 / 3.0).abs() < 1e-9 {
        Ok("half-overlap case exact to 1e-9".into())
    } else {
        Err(format!("got {got}, want 1/3"))
    }
}

fn ap_protocol(c: &Ctx<'_>) -> Result<String, String> {
    let classes = default_classes(4);
    let expect = [0.5, 0.25, 0.25, 0.5];
    for (spec, want) in classes.iter().zip(expect) {
        if spec.iou_threshold != want {
            return Err(format!("{}: threshold {}", spec.name, spec.iou_threshold));
        }
    }
    let gts = vec![GroundTruthBox {
        box3d: Box3D::new([0.0, 0.0, 0.0], [2.0, 2.0, 2.0], 0.0),
        class: 0,
    }];
    let dets = vec![Detection {
        box3d: gts[0].box3d,
        score: 0.9,
        class: 0,
    }];
    let ap = c.perturb(
        "ap_protocol",
        average_precision(&dets, &gts, IouKind::Bev, 0.5).ap,
    );
    if (ap - 1.0).abs() > 1e-12 {
        return Err(format!("perfect detection AP = {ap}"));
    }
    Ok("thresholds 0.5/0.25/0.25/0.5; perfect detection AP = 1".into())
}

fn pipeline_determinism(c: &Ctx<'_>) -> Result<String, String> {
    let mut cfg = c.cfg.clone();
    cfg.encoder.hidden = 8;
    cfg.encoder.out = 8;
    cfg.fusion.width = 8;
    cfg.fusion.image_channels = 8;
    cfg.fusion.roi_grid = 2;
    cfg.plfe.grid = [2, 2, 2];
    cfg.plfe.cell_width = 8;
    cfg.plfe.grid_hidden = 8;
    cfg.plfe.token_width = 8;
    cfg.plfe.head_hidden = 16;
    cfg.proposals.count = 4;
    let ctx = ModelContext::new(cfg.clone()).map_err(|e| e.to_string())?;
    let frames: Vec<(u64, FrameInputs)> = (0..2u64)
        .map(|i| {
            let scene = synth_scene(50 + i, 2, 15, "vod7");
            let pyramid = synth_pyramid(&scene.image, &cfg, 50 + i);
            (
                i,
                FrameInputs {
                    points: scene.points,
                    mask: scene.mask,
                    calibration: scene.calibration,
                    pyramid,
                },
            )
        })
        .collect();
    let none = BTreeSet::new();
    let a = run_frames(&ctx, &frames, 1, &none).map_err(|e| e.to_string())?;
    let b = run_frames(&ctx, &frames, 8, &none).map_err(|e| e.to_string())?;
    for (x, y) in a.iter().zip(&b) {
        let ca = crate::io::csvio::detections_to_csv(&x.detections);
        let mut cb = crate::io::csvio::detections_to_csv(&y.detections);
        if c.fault == Some("pipeline_determinism") {
            cb.push('x');
        }
        if ca != cb {
            return Err(format!("frame {} differs across worker counts", x.frame_id));
        }
    }
    Ok("1 vs 8 workers byte-identical over 2 frames".into())
}

fn config_defaults(c: &Ctx<'_>) -> Result<String, String> {
    let cfg = PipelineConfig::default();
    let r = c.perturb("config_defaults", cfg.sampler.radius_px);
    if r != 51.0
        || cfg.sampler.sigma1_px != 7.0
        || cfg.sampler.tau != 50
        || cfg.fusion.heads != 4
        || cfg.fusion.sample_points != 4
        || cfg.fusion.image_levels != 5
        || cfg.plfe.grid != [6, 6, 6]
        || cfg.grid.voxel != [0.05, 0.05, 0.125]
    {
        return Err("defaults drifted from the reference operating point".into());
    }
    Ok("defaults match the reference operating point".into())
}

const CHECKS: &[(&str, CheckFn)] = &[
    ("geometry_round_trip", geometry_round_trip),
    ("softmax_normalization", softmax_normalization),
    ("sigmoid_symmetry", sigmoid_symmetry),
    ("init_determinism", init_determinism),
    ("densify_counts", densify_counts),
    ("depth_copy", depth_copy),
    ("attention_sums", attention_sums),
    ("jvp_suite", jvp_suite),
    ("iou_analytic", iou_analytic),
    ("ap_protocol", ap_protocol),
    ("pipeline_determinism", pipeline_determinism),
    ("config_defaults", config_defaults),
];

pub fn known_check(name: &str) -> bool {
    CHECKS.iter().any(|(n, _)| *n == name)
}

/// Run every named check; `fault` breaks the named one as a negative
/// control.
pub fn check_suite(cfg: &PipelineConfig, fault: Option<&str>) -> CheckReport {
    let ctx = Ctx { cfg, fault };
    let outcomes = CHECKS
        .iter()
        .map(|(name, f)| match f(&ctx) {
            Ok(detail) => CheckOutcome {
                name,
                passed: true,
                detail,
            },
            Err(detail) => CheckOutcome {
                name,
                passed: false,
                detail,
            },
        })
        .collect();
    CheckReport { outcomes }
}
