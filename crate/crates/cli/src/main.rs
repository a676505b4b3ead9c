//! `radfuse`: synthetic scenes, densification, voxel encoding, fusion,
//! refinement, evaluation, invariant checks, and plots over documented file
//! formats. Exit codes: 0 ok, 1 check failure, 2 I/O or format error.

use clap::{Args, Parser, Subcommand};
use radfuse::config::PipelineConfig;
use radfuse::error::{CliError, CliResult};
use radfuse::io::{calib, csvio, pgm, rtf};
use radfuse::pipeline::{run_frames, synth_pyramid, FrameInputs, ModelContext};
use radfuse::plot::{bev_scatter, pr_curves_svg, BevExtent};
use radfuse::synth::{synth_scene, RgbImage};
use radfuse_core::metrics::{evaluate, IouKind};
use radfuse_core::scene_fusion::{FeaturePyramid, PyramidLevel};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "radfuse", version, about = "4D-radar + camera fusion detection pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArg {
    /// TOML configuration; defaults reproduce the reference operating point.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the TJ4D preset instead of the VoD defaults.
    #[arg(long, default_value_t = false)]
    tj4d: bool,
}

impl ConfigArg {
    fn load(&self) -> CliResult<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None if self.tj4d => PipelineConfig::tj4d(),
            None => PipelineConfig::default(),
        };
        cfg.apply_env_override();
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct PyramidArgs {
    /// RTF feature maps, one per level, ascending stride.
    #[arg(long, value_delimiter = ',')]
    pyramid: Vec<PathBuf>,
    /// Generate the pyramid from the scene image with this seed.
    #[arg(long)]
    synth_pyramid: Option<u64>,
    /// Image (PPM) backing --synth-pyramid.
    #[arg(long)]
    image: Option<PathBuf>,
}

impl PyramidArgs {
    fn load(&self, cfg: &PipelineConfig) -> CliResult<FeaturePyramid> {
        if let Some(seed) = self.synth_pyramid {
            let path = self
                .image
                .as_ref()
                .ok_or_else(|| CliError::format("--synth-pyramid needs --image"))?;
            let bytes = std::fs::read(path)?;
            let image = RgbImage::from_ppm(&bytes)
                .ok_or_else(|| CliError::format("image: expected binary PPM (P6)"))?;
            return Ok(synth_pyramid(&image, cfg, seed));
        }
        if self.pyramid.is_empty() {
            return Err(CliError::format(
                "need --pyramid level files or --synth-pyramid",
            ));
        }
        if self.pyramid.len() != cfg.fusion.strides.len() {
            return Err(CliError::format(format!(
                "{} pyramid files for {} configured strides",
                self.pyramid.len(),
                cfg.fusion.strides.len()
            )));
        }
        let levels = self
            .pyramid
            .iter()
            .zip(&cfg.fusion.strides)
            .map(|(p, &stride)| Ok(PyramidLevel { features: rtf::read(p)?, stride }))
            .collect::<CliResult<Vec<_>>>()?;
        let pyr = FeaturePyramid { levels };
        if !pyr.validate() {
            return Err(CliError::format(
                "pyramid levels must share channels with ascending strides",
            ));
        }
        Ok(pyr)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene (points, mask, calibration, image, GT).
    Synth {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        objects: usize,
        #[arg(long, default_value_t = 40)]
        clutter: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Densify radar points with instance guidance.
    Densify {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        classes: PathBuf,
        #[arg(long)]
        calib: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        frame_id: u64,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Voxelize hybrid points into the padded per-voxel tensor.
    Voxelize {
        #[arg(long)]
        hybrid: PathBuf,
        #[arg(long)]
        out_points: PathBuf,
        #[arg(long)]
        out_coords: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Encode hybrid points into per-voxel features.
    Encode {
        #[arg(long)]
        hybrid: PathBuf,
        #[arg(long)]
        out_features: PathBuf,
        #[arg(long)]
        out_coords: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Scene-level fusion: encode, downsample, propose, fuse, pool.
    Fuse {
        #[arg(long)]
        hybrid: PathBuf,
        #[arg(long)]
        calib: PathBuf,
        #[command(flatten)]
        pyramid: PyramidArgs,
        /// Load proposals instead of the density heuristic.
        #[arg(long)]
        proposals: Option<PathBuf>,
        #[arg(long)]
        out_slp: PathBuf,
        #[arg(long)]
        out_proposals: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Proposal-level fusion and the detection head.
    Refine {
        #[arg(long)]
        hybrid: PathBuf,
        #[arg(long)]
        calib: PathBuf,
        #[command(flatten)]
        pyramid: PyramidArgs,
        #[arg(long)]
        proposals: PathBuf,
        #[arg(long)]
        slp: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Full pipeline over synthetic frames.
    Pipeline {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        frames: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 4)]
        objects: usize,
        #[arg(long, default_value_t = 40)]
        clutter: usize,
        /// Stage dumps: densify, voxelize, tavfe, downsample, proposals,
        /// hsfp, plfe, detections, or all.
        #[arg(long = "dump-stage")]
        dump_stage: Vec<String>,
        /// Override the configured scene-fusion levels, e.g. `x4`.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Evaluate detections against ground truth.
    Eval {
        #[arg(long)]
        dets: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// vod_eaa | vod_dca | tj4d (defaults to the config's protocol).
        #[arg(long)]
        protocol: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Run the invariant suite.
    Check {
        /// Break the named check as a negative control.
        #[arg(long)]
        inject_fault: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Emit plots from dumps (BEV scatter, PR curves).
    Plot {
        /// Hybrid points CSV for the BEV scatter.
        #[arg(long)]
        hybrid: Option<PathBuf>,
        /// Ground-truth CSV drawn as outlines.
        #[arg(long)]
        gt: Option<PathBuf>,
        /// Evaluation report JSON for PR curves.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
}

fn ensure_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

fn cmd_synth(seed: u64, objects: usize, clutter: usize, out: &Path, cfg: &PipelineConfig)
    -> CliResult<()> {
    let schema = cfg.schema()?;
    let scene = synth_scene(seed, objects, clutter, schema.token);
    ensure_dir(out)?;
    csvio::write_points(&out.join("points.csv"), &scene.points, schema.token)?;
    pgm::write_mask(&out.join("mask.pgm"), &out.join("mask_classes.json"), &scene.mask)?;
    calib::write(&out.join("calib.json"), &scene.calibration)?;
    std::fs::write(out.join("image.ppm"), scene.image.to_ppm())?;
    csvio::write_ground_truth(&out.join("gt.csv"), &scene.gt)?;
    println!(
        "scene seed {seed}: {} objects, {} points -> {}",
        scene.gt.len(),
        scene.points.len(),
        out.display()
    );
    Ok(())
}

fn read_hybrid_checked(
    path: &Path,
    cfg: &PipelineConfig,
) -> CliResult<Vec<radfuse_core::densify::HybridPoint>> {
    let (token, n_classes, hybrid) = csvio::read_hybrid(path)?;
    let schema = cfg.schema()?;
    if token != schema.token || n_classes != schema.n_classes {
        return Err(CliError::format(format!(
            "hybrid file is {token}+e{n_classes}, config wants {}+e{}",
            schema.token, schema.n_classes
        )));
    }
    Ok(hybrid)
}

fn run() -> CliResult<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Synth {
            seed,
            objects,
            clutter,
            out,
            config,
        } => {
            cmd_synth(seed, objects, clutter, &out, &config.load()?)?;
            Ok(0)
        }
        Command::Densify {
            points,
            mask,
            classes,
            calib: calib_path,
            out,
            frame_id,
            config,
        } => {
            let cfg = config.load()?;
            let schema = cfg.schema()?;
            let (token, pts) = csvio::read_points(&points)?;
            if token != schema.token {
                return Err(CliError::format(format!(
                    "points are {token}, config wants {}",
                    schema.token
                )));
            }
            let mask = pgm::read_mask(&mask, &classes)?;
            let cal = calib::read(&calib_path)?;
            let hybrid = radfuse_core::densify::densify_frame(
                &pts,
                &mask,
                &cal,
                &cfg.densify_config()?,
                frame_id,
            )
            .map_err(|e| CliError::Stage {
                stage: "densify",
                frame: frame_id,
                detail: e.to_string(),
            })?;
            csvio::write_hybrid(&out, &hybrid, schema.token, schema.n_classes)?;
            println!(
                "densified {} raw -> {} hybrid points",
                pts.len(),
                hybrid.len()
            );
            Ok(0)
        }
        Command::Voxelize {
            hybrid,
            out_points,
            out_coords,
            config,
        } => {
            let cfg = config.load()?;
            let pts = read_hybrid_checked(&hybrid, &cfg)?;
            let vs = radfuse_core::voxel::voxelize(
                &pts,
                &cfg.grid_spec(),
                cfg.grid.max_points_per_voxel,
            );
            rtf::write(&out_points, &vs.points)?;
            std::fs::write(&out_coords, csvio::coords_to_csv(&vs.coords))?;
            println!("{} non-empty voxels", vs.n_voxels());
            Ok(0)
        }
        Command::Encode {
            hybrid,
            out_features,
            out_coords,
            config,
        } => {
            let cfg = config.load()?;
            let pts = read_hybrid_checked(&hybrid, &cfg)?;
            let ctx = ModelContext::new(cfg)?;
            let grid = ctx.cfg.grid_spec();
            let vs = radfuse_core::voxel::voxelize(&pts, &grid, ctx.cfg.grid.max_points_per_voxel);
            let out = radfuse_core::voxel::tavfe(&vs, &grid, &ctx.store, &ctx.cfg.tavfe_config())
                .map_err(|e| CliError::Stage {
                    stage: "tavfe",
                    frame: 0,
                    detail: e.to_string(),
                })?;
            rtf::write(&out_features, &out.features)?;
            std::fs::write(&out_coords, csvio::coords_to_csv(&out.coords))?;
            println!(
                "encoded {} voxels to width {}",
                out.coords.len(),
                ctx.cfg.encoder.out
            );
            Ok(0)
        }
        Command::Fuse {
            hybrid,
            calib: calib_path,
            pyramid,
            proposals,
            out_slp,
            out_proposals,
            config,
        } => {
            let cfg = config.load()?;
            let pts = read_hybrid_checked(&hybrid, &cfg)?;
            let cal = calib::read(&calib_path)?;
            let pyr = pyramid.load(&cfg)?;
            let ctx = ModelContext::new(cfg)?;
            let grid = ctx.cfg.grid_spec();
            let vs = radfuse_core::voxel::voxelize(&pts, &grid, ctx.cfg.grid.max_points_per_voxel);
            let encoded =
                radfuse_core::voxel::tavfe(&vs, &grid, &ctx.store, &ctx.cfg.tavfe_config())
                    .map_err(|e| CliError::Stage {
                        stage: "tavfe",
                        frame: 0,
                        detail: e.to_string(),
                    })?;
            let levels = radfuse_core::scene_fusion::multiscale_downsample(&encoded, &ctx.store)
                .map_err(|e| CliError::Stage {
                    stage: "downsample",
                    frame: 0,
                    detail: e.to_string(),
                })?;
            let props = match proposals {
                Some(path) => csvio::read_detections(&path)?
                    .into_iter()
                    .map(|d| radfuse_core::scene_fusion::Proposal {
                        box3d: d.box3d,
                        score: d.score,
                        class: d.class,
                    })
                    .collect(),
                None => radfuse_core::scene_fusion::heuristic_proposals(
                    &pts,
                    &ctx.cfg.anchor_set(),
                    ctx.cfg.proposals.count,
                    ctx.cfg.proposals.bev_cell,
                ),
            };
            let selected: Vec<&radfuse_core::scene_fusion::SparseVoxelFeatures> = ctx
                .cfg
                .selected_scales()
                .iter()
                .map(|&s| levels.iter().find(|l| l.scale == s).expect("all scales"))
                .collect();
            let f_slp = radfuse_core::scene_fusion::hsfp(
                &selected,
                &pyr,
                &cal,
                &props,
                &ctx.store,
                &ctx.cfg.deform_config(),
                ctx.cfg.fusion.roi_grid,
            )
            .map_err(|e| CliError::Stage {
                stage: "hsfp",
                frame: 0,
                detail: e.to_string(),
            })?;
            rtf::write(&out_slp, &f_slp)?;
            let as_dets: Vec<radfuse_core::metrics::Detection> = props
                .iter()
                .map(|p| radfuse_core::metrics::Detection {
                    box3d: p.box3d,
                    score: p.score,
                    class: p.class,
                })
                .collect();
            csvio::write_detections(&out_proposals, &as_dets)?;
            println!(
                "pooled {} proposals to width {}",
                props.len(),
                f_slp.dims()[1]
            );
            Ok(0)
        }
        Command::Refine {
            hybrid,
            calib: calib_path,
            pyramid,
            proposals,
            slp,
            out,
            config,
        } => {
            let cfg = config.load()?;
            let pts = read_hybrid_checked(&hybrid, &cfg)?;
            let cal = calib::read(&calib_path)?;
            let pyr = pyramid.load(&cfg)?;
            let props: Vec<radfuse_core::scene_fusion::Proposal> =
                csvio::read_detections(&proposals)?
                    .into_iter()
                    .map(|d| radfuse_core::scene_fusion::Proposal {
                        box3d: d.box3d,
                        score: d.score,
                        class: d.class,
                    })
                    .collect();
            let f_slp = rtf::read(&slp)?;
            if f_slp.dims()[0] != props.len() {
                return Err(CliError::format(format!(
                    "slp rows {} != proposals {}",
                    f_slp.dims()[0],
                    props.len()
                )));
            }
            let ctx = ModelContext::new(cfg)?;
            let plfe_cfg = ctx.cfg.plfe_config();
            let deform = ctx.cfg.deform_config();
            let n_g = plfe_cfg.grid.cells();
            let mut plp = vec![0.0f32; props.len() * n_g * plfe_cfg.cell_width];
            for (pi, p) in props.iter().enumerate() {
                let cells = radfuse_core::proposal_fusion::proposal_grid(p, &pts, &plfe_cfg.grid);
                let queries =
                    radfuse_core::proposal_fusion::grid_encode(&cells, &ctx.store, "plfe.grid")
                        .map_err(|e| CliError::Stage {
                            stage: "plfe",
                            frame: 0,
                            detail: e.to_string(),
                        })?;
                let fused = radfuse_core::proposal_fusion::qgplf_block(
                    &queries,
                    &cells,
                    &pyr,
                    &cal,
                    &ctx.store,
                    "plfe.deform",
                    &deform,
                )
                .map_err(|e| CliError::Stage {
                    stage: "plfe",
                    frame: 0,
                    detail: e.to_string(),
                })?;
                let w = n_g * plfe_cfg.cell_width;
                plp[pi * w..(pi + 1) * w].copy_from_slice(fused.data());
            }
            let f_plp = radfuse_core::tensor::Tensor::new(
                vec![props.len(), n_g * plfe_cfg.cell_width],
                plp,
            )
            .map_err(|e| CliError::format(e.to_string()))?;
            let x_p = radfuse_core::proposal_fusion::plfe_fuse(&f_plp, &f_slp, &ctx.store, &plfe_cfg)
                .map_err(|e| CliError::Stage {
                    stage: "plfe",
                    frame: 0,
                    detail: e.to_string(),
                })?;
            let refined = radfuse_core::proposal_fusion::detect_head(&x_p, &props, &ctx.store)
                .map_err(|e| CliError::Stage {
                    stage: "head",
                    frame: 0,
                    detail: e.to_string(),
                })?;
            let decoded: Vec<(radfuse_core::boxes::Box3D, f32, usize)> = refined
                .iter()
                .map(|r| (r.decoded(), r.confidence, r.base.class))
                .collect();
            let kept = radfuse_core::proposal_fusion::nms_bev(&decoded, ctx.cfg.proposals.nms_iou);
            let dets: Vec<radfuse_core::metrics::Detection> = kept
                .iter()
                .map(|&i| radfuse_core::metrics::Detection {
                    box3d: decoded[i].0,
                    score: decoded[i].1,
                    class: decoded[i].2,
                })
                .collect();
            csvio::write_detections(&out, &dets)?;
            println!("refined {} proposals -> {} detections", props.len(), dets.len());
            Ok(0)
        }
        Command::Pipeline {
            seed,
            frames,
            workers,
            objects,
            clutter,
            dump_stage,
            levels,
            out,
            config,
        } => {
            let mut cfg = config.load()?;
            if !levels.is_empty() {
                cfg.fusion.levels = levels;
                cfg.validate()?;
            }
            let schema_token = cfg.schema()?.token;
            let ctx = ModelContext::new(cfg)?;
            ensure_dir(&out)?;
            let dump: BTreeSet<String> = dump_stage.into_iter().collect();
            let mut inputs = Vec::with_capacity(frames);
            let mut gts = Vec::with_capacity(frames);
            for i in 0..frames {
                let fseed = seed + i as u64;
                let scene = synth_scene(fseed, objects, clutter, schema_token);
                let pyramid = synth_pyramid(&scene.image, &ctx.cfg, fseed);
                gts.push(scene.gt.clone());
                inputs.push((
                    fseed,
                    FrameInputs {
                        points: scene.points,
                        mask: scene.mask,
                        calibration: scene.calibration,
                        pyramid,
                    },
                ));
            }
            let results = run_frames(&ctx, &inputs, workers, &dump)?;
            let mut merged = String::from(csvio::BOX_HEADER);
            merged.push('\n');
            for (i, r) in results.iter().enumerate() {
                let prefix = format!("frame_{:04}", r.frame_id);
                let det_csv = csvio::detections_to_csv(&r.detections);
                for line in det_csv.lines().skip(1) {
                    merged.push_str(line);
                    merged.push('\n');
                }
                std::fs::write(out.join(format!("{prefix}_detections.csv")), det_csv)?;
                csvio::write_ground_truth(&out.join(format!("{prefix}_gt.csv")), &gts[i])?;
                for (name, bytes) in &r.dumps {
                    std::fs::write(out.join(format!("{prefix}_{name}")), bytes)?;
                }
                println!(
                    "frame {}: {} points, {} proposals, {} detections",
                    r.frame_id,
                    r.hybrid.len(),
                    r.proposals.len(),
                    r.detections.len()
                );
            }
            std::fs::write(out.join("detections.csv"), merged)?;
            Ok(0)
        }
        Command::Eval {
            dets,
            gt,
            protocol,
            out,
            config,
        } => {
            let mut cfg = config.load()?;
            if let Some(p) = protocol {
                cfg.eval.protocol = p;
            }
            let protocol = cfg.protocol()?;
            let dets = csvio::read_detections(&dets)?;
            let gts = csvio::read_ground_truth(&gt)?;
            let iou_kind = match cfg.eval.iou_kind.as_str() {
                "3d" => IouKind::Volume,
                _ => IouKind::Bev,
            };
            let report = evaluate(
                &dets,
                &gts,
                protocol,
                &cfg.class_specs()?,
                iou_kind,
                cfg.dca_axes(),
            )
            .map_err(|e| CliError::format(e.to_string()))?;
            print!("{}", radfuse::io::report_to_table(&report));
            if let Some(path) = out {
                radfuse::io::write_report(&path, &report)?;
            }
            Ok(0)
        }
        Command::Check {
            inject_fault,
            out,
            config,
        } => {
            let cfg = config.load()?;
            if let Some(name) = &inject_fault {
                if !radfuse::checks::known_check(name) {
                    return Err(CliError::format(format!("unknown check '{name}'")));
                }
            }
            let report = radfuse::checks::check_suite(&cfg, inject_fault.as_deref());
            for o in &report.outcomes {
                println!(
                    "{} {}: {}",
                    if o.passed { "pass" } else { "FAIL" },
                    o.name,
                    o.detail
                );
            }
            if let Some(path) = out {
                std::fs::write(path, report.to_json())?;
            }
            if report.passed() {
                Ok(0)
            } else {
                Err(CliError::Check("invariant suite failed".into()))
            }
        }
        Command::Plot {
            hybrid,
            gt,
            report,
            out,
            config,
        } => {
            let _cfg = config.load()?;
            if let Some(report_path) = report {
                let text = std::fs::read_to_string(&report_path)?;
                let v: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| CliError::format(format!("report: {e}")))?;
                let report = report_from_json(&v)?;
                std::fs::write(&out, pr_curves_svg(&report))?;
                println!("wrote {}", out.display());
                return Ok(0);
            }
            let hybrid_path = hybrid
                .ok_or_else(|| CliError::format("plot needs --hybrid (scatter) or --report (PR)"))?;
            let (_, _, pts) = csvio::read_hybrid(&hybrid_path)?;
            let gts = match gt {
                Some(path) => csvio::read_ground_truth(&path)?,
                None => Vec::new(),
            };
            std::fs::write(&out, bev_scatter(&pts, &gts, BevExtent::default(), 800))?;
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}

/// Rebuild an EvalReport from its JSON (for `plot --report`).
fn report_from_json(v: &serde_json::Value) -> CliResult<radfuse_core::metrics::EvalReport> {
    use radfuse_core::metrics::{EvalReport, PRCurve, Protocol};
    let protocol = match v["protocol"].as_str() {
        Some("vod_eaa") => Protocol::VodEaa,
        Some("vod_dca") => Protocol::VodDca,
        Some("tj4d") => Protocol::Tj4d,
        other => return Err(CliError::format(format!("report: bad protocol {other:?}"))),
    };
    let classes = v["classes"]
        .as_object()
        .ok_or_else(|| CliError::format("report: classes must be an object"))?;
    let mut per_class = Vec::new();
    for (name, entry) in classes {
        let ap = entry["ap"]
            .as_f64()
            .ok_or_else(|| CliError::format("report: ap must be a number"))?;
        let points = entry["pr"]
            .as_array()
            .map(|arr| {
                arr.iter()
                    .filter_map(|p| Some((p[0].as_f64()?, p[1].as_f64()?)))
                    .collect()
            })
            .unwrap_or_default();
        per_class.push((name.clone(), PRCurve { points, ap }));
    }
    let map = v["map"]
        .as_f64()
        .ok_or_else(|| CliError::format("report: map must be a number"))?;
    Ok(EvalReport {
        protocol,
        per_class,
        map,
    })
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
