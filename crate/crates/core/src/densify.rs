//! Instance-guided virtual point generation: foreground filtering, Gaussian
//! and uniform 2D sampling inside instance masks, depth transfer from nearest
//! foreground points, reprojection to 3D, and hybrid-set tagging.
//!
//! All sampling draws from a SplitMix64 stream keyed by `(seed, frame,
//! instance)`, so frames and instances can be processed in parallel without
//! changing output.

use crate::error::DensifyError;
use crate::geometry::{self, Calibration, Projected};
use crate::rng::SplitMix64;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

/// A raw radar return: 3D position plus dataset-specific attributes
/// (VoD: RCS, v_r, v_rc, scan index; TJ4D: v_r, range, power, alpha, beta).
#[derive(Clone, Debug, PartialEq)]
pub struct RadarPoint {
    pub pos: [f64; 3],
    pub attrs: Vec<f32>,
}

/// Integer instance-id map (0 = background) with per-instance class indices.
#[derive(Clone, Debug)]
pub struct InstanceMask {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    classes: BTreeMap<u32, usize>,
    bboxes: BTreeMap<u32, [usize; 4]>, // col0, row0, col1, row1 inclusive
}

impl InstanceMask {
    /// Build a mask, checking that every nonzero label has a class entry.
    pub fn new(
        width: usize,
        height: usize,
        labels: Vec<u32>,
        classes: BTreeMap<u32, usize>,
    ) -> Result<Self, DensifyError> {
        assert_eq!(labels.len(), width * height, "label map size mismatch");
        let mut bboxes: BTreeMap<u32, [usize; 4]> = BTreeMap::new();
        for row in 0..height {
            for col in 0..width {
                let id = labels[row * width + col];
                if id == 0 {
                    continue;
                }
                if !classes.contains_key(&id) {
                    return Err(DensifyError::UnlabeledInstance { instance: id });
                }
                let b = bboxes.entry(id).or_insert([col, row, col, row]);
                b[0] = b[0].min(col);
                b[1] = b[1].min(row);
                b[2] = b[2].max(col);
                b[3] = b[3].max(row);
            }
        }
        Ok(Self {
            width,
            height,
            labels,
            classes,
            bboxes,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            labels: vec![0; width * height],
            classes: BTreeMap::new(),
            bboxes: BTreeMap::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label_at(&self, col: usize, row: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Instance ids present in the label map, ascending.
    pub fn instance_ids(&self) -> Vec<u32> {
        self.bboxes.keys().copied().collect()
    }

    pub fn class_of(&self, id: u32) -> Option<usize> {
        self.classes.get(&id).copied()
    }

    pub fn classes(&self) -> &BTreeMap<u32, usize> {
        &self.classes
    }

    /// Inclusive pixel bounds of an instance, if present.
    pub fn bbox(&self, id: u32) -> Option<[usize; 4]> {
        self.bboxes.get(&id).copied()
    }

    /// Label at the rounded pixel, or None when the rounded pixel leaves the
    /// image. Rounding is half-away-from-zero, the convention used everywhere
    /// a continuous coordinate meets the label grid.
    pub fn label_at_rounded(&self, u: f64, v: f64) -> Option<u32> {
        let col = libm::round(u);
        let row = libm::round(v);
        if col < 0.0 || row < 0.0 {
            return None;
        }
        let (col, row) = (col as usize, row as usize);
        if col >= self.width || row >= self.height {
            return None;
        }
        Some(self.label_at(col, row))
    }
}

/// Sampler settings (defaults elsewhere: r = 51 px, sigma = 7 px, tau = 50).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub radius_px: f64,
    pub sigma1_px: f64,
    pub sigma2_px: f64,
    pub tau: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn valid(&self) -> bool {
        self.radius_px > 0.0 && self.sigma1_px > 0.0 && self.sigma2_px > 0.0 && self.tau > 0
    }
}

/// A projected radar point retained on an instance.
#[derive(Clone, Debug, PartialEq)]
pub struct ForegroundPoint {
    pub u: f64,
    pub v: f64,
    pub d: f64,
    pub attrs: Vec<f32>,
}

/// Project every point and bucket the retained ones by the instance whose
/// mask pixel (rounded to nearest) they land on. Background and dropped
/// points join no set.
pub fn filter_foreground(
    points: &[RadarPoint],
    mask: &InstanceMask,
    cal: &Calibration,
) -> BTreeMap<u32, Vec<ForegroundPoint>> {
    let mut sets: BTreeMap<u32, Vec<ForegroundPoint>> = BTreeMap::new();
    for p in points {
        let (u, v, d) = match geometry::project(p.pos, cal) {
            Projected::Pixel { u, v, d } => (u, v, d),
            Projected::Dropped => continue,
        };
        if let Some(id) = mask.label_at_rounded(u, v) {
            if id != 0 {
                sets.entry(id).or_default().push(ForegroundPoint {
                    u,
                    v,
                    d,
                    attrs: p.attrs.clone(),
                });
            }
        }
    }
    sets
}

/// 2D samples drawn on one instance, split by sampling mode.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampledSet {
    pub gauss: Vec<(f64, f64)>,
    pub uniform: Vec<(f64, f64)>,
}

/// Rejection-resampling budget per requested sample.
const MAX_ATTEMPTS_PER_SAMPLE: usize = 1000;

/// Sample virtual 2D points on one instance.
///
/// Gaussian mode: pick a foreground point uniformly, draw
/// `N([u_i, v_i], diag(sigma1^2, sigma2^2))`, accept iff the sample lies on
/// the instance mask and inside the union of radius-r disks around the
/// foreground points; resample up to `1000 * tau` attempts. Uniform mode:
/// `tau` draws over the instance pixels outside that disk union (empty set
/// means no uniform samples).
pub fn sample_instance(
    fg: &[ForegroundPoint],
    mask: &InstanceMask,
    instance_id: u32,
    cfg: &SamplerConfig,
    frame_id: u64,
) -> SampledSet {
    let mut out = SampledSet::default();
    if fg.is_empty() {
        return out;
    }
    let mut rng = SplitMix64::keyed(cfg.seed, &[frame_id, instance_id as u64]);
    let r2 = cfg.radius_px * cfg.radius_px;
    let in_disks = |u: f64, v: f64| -> bool {
        fg.iter().any(|f| {
            let du = u - f.u;
            let dv = v - f.v;
            du * du + dv * dv < r2
        })
    };

    let mut attempts = 0usize;
    let budget = MAX_ATTEMPTS_PER_SAMPLE.saturating_mul(cfg.tau);
    while out.gauss.len() < cfg.tau && attempts < budget {
        attempts += 1;
        let center = &fg[rng.index(fg.len())];
        let (g1, g2) = rng.normal_pair();
        let u = center.u + cfg.sigma1_px * g1;
        let v = center.v + cfg.sigma2_px * g2;
        let on_mask = mask.label_at_rounded(u, v) == Some(instance_id);
        if on_mask && in_disks(u, v) {
            out.gauss.push((u, v));
        }
    }

    // Pixels of the instance outside the disk union, scanned in row-major
    // order within the instance bounding box.
    let Some([c0, r0, c1, r1]) = mask.bbox(instance_id) else {
        return out;
    };
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for row in r0..=r1 {
        for col in c0..=c1 {
            if mask.label_at(col, row) == instance_id {
                let (u, v) = (col as f64, row as f64);
                if !in_disks(u, v) {
                    candidates.push((u, v));
                }
            }
        }
    }
    if !candidates.is_empty() {
        for _ in 0..cfg.tau {
            out.uniform.push(candidates[rng.index(candidates.len())]);
        }
    }
    out
}

/// A 2D sample with transferred depth and attributes, ready to reproject.
#[derive(Clone, Debug, PartialEq)]
pub struct VirtualPixel {
    pub u: f64,
    pub v: f64,
    pub d: f64,
    pub attrs: Vec<f32>,
}

/// Transfer depth and attributes from foreground neighbors.
///
/// Each Gaussian sample copies from its single nearest foreground point in
/// pixel distance (ties broken by lowest index). Each uniform sample spawns
/// `min(4, |Q_j|)` virtual pixels at the same `(u, v)`, one per nearest
/// neighbor, so one 2D sample yields up to four 3D points along its ray.
pub fn assign_depth(sampled: &SampledSet, fg: &[ForegroundPoint]) -> Vec<VirtualPixel> {
    assert!(!fg.is_empty(), "assign_depth requires foreground points");
    let mut out = Vec::with_capacity(sampled.gauss.len() + 4 * sampled.uniform.len());
    for &(u, v) in &sampled.gauss {
        let mut best = 0usize;
        let mut best_d2 = f64::INFINITY;
        for (i, f) in fg.iter().enumerate() {
            let d2 = (u - f.u) * (u - f.u) + (v - f.v) * (v - f.v);
            if d2 < best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        out.push(VirtualPixel {
            u,
            v,
            d: fg[best].d,
            attrs: fg[best].attrs.clone(),
        });
    }
    let k = fg.len().min(4);
    for &(u, v) in &sampled.uniform {
        let mut order: Vec<(f64, usize)> = fg
            .iter()
            .enumerate()
            .map(|(i, f)| ((u - f.u) * (u - f.u) + (v - f.v) * (v - f.v), i))
            .collect();
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, i) in order.iter().take(k) {
            out.push(VirtualPixel {
                u,
                v,
                d: fg[i].d,
                attrs: fg[i].attrs.clone(),
            });
        }
    }
    out
}

/// Point provenance tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Raw,
    Virtual,
}

impl PointKind {
    /// One-hot `[raw, virtual]`.
    pub fn one_hot(self) -> [f32; 2] {
        match self {
            PointKind::Raw => [1.0, 0.0],
            PointKind::Virtual => [0.0, 1.0],
        }
    }
}

/// A point of the hybrid set: raw returns are unit-padded on the semantic
/// slot, virtual points carry their source instance's class one-hot.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridPoint {
    pub pos: [f64; 3],
    pub attrs: Vec<f32>,
    pub class_onehot: Vec<f32>,
    pub kind: PointKind,
    /// Source instance for virtual points; None for raw.
    pub source_instance: Option<u32>,
}

impl HybridPoint {
    /// Fixed-width feature row: `[x, y, z, o.., e.., r..]`.
    pub fn feature(&self) -> Vec<f32> {
        let mut f = Vec::with_capacity(3 + self.attrs.len() + self.class_onehot.len() + 2);
        f.push(self.pos[0] as f32);
        f.push(self.pos[1] as f32);
        f.push(self.pos[2] as f32);
        f.extend_from_slice(&self.attrs);
        f.extend_from_slice(&self.class_onehot);
        f.extend_from_slice(&self.kind.one_hot());
        f
    }

    /// Feature width for a dataset with `attr_len` attributes and
    /// `n_classes` classes: `3 + |o| + |e| + 2`.
    pub fn feature_width(attr_len: usize, n_classes: usize) -> usize {
        3 + attr_len + n_classes + 2
    }
}

/// Densification settings beyond the sampler itself.
#[derive(Clone, Copy, Debug)]
pub struct DensifyConfig {
    pub sampler: SamplerConfig,
    /// Expected attribute width (4 for the 7-d schema, 5 for the 8-d one).
    pub attr_len: usize,
    /// One-hot class width (also the width of the raw-point unit padding).
    pub n_classes: usize,
}

/// Full densification of one frame: raw points in input order first (tagged
/// `[1, 0]`, unit-padded semantics), then virtual points ordered by
/// `(instance id, sample index)`. Deterministic for a fixed seed and frame.
pub fn densify_frame(
    points: &[RadarPoint],
    mask: &InstanceMask,
    cal: &Calibration,
    cfg: &DensifyConfig,
    frame_id: u64,
) -> Result<Vec<HybridPoint>, DensifyError> {
    for p in points {
        if p.attrs.len() != cfg.attr_len {
            return Err(DensifyError::SchemaMismatch {
                expected: cfg.attr_len,
                got: p.attrs.len(),
            });
        }
    }
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        out.push(HybridPoint {
            pos: p.pos,
            attrs: p.attrs.clone(),
            class_onehot: vec![1.0; cfg.n_classes],
            kind: PointKind::Raw,
            source_instance: None,
        });
    }
    let fg_sets = filter_foreground(points, mask, cal);
    for (&instance_id, fg) in &fg_sets {
        if fg.is_empty() {
            continue;
        }
        let class = mask
            .class_of(instance_id)
            .ok_or(DensifyError::UnlabeledInstance {
                instance: instance_id,
            })?;
        if class >= cfg.n_classes {
            return Err(DensifyError::ClassOutOfRange {
                class,
                n_classes: cfg.n_classes,
            });
        }
        let mut one_hot = vec![0.0f32; cfg.n_classes];
        one_hot[class] = 1.0;
        let sampled = sample_instance(fg, mask, instance_id, &cfg.sampler, frame_id);
        for vp in assign_depth(&sampled, fg) {
            let pos = geometry::reproject(vp.u, vp.v, vp.d, cal)?;
            out.push(HybridPoint {
                pos,
                attrs: vp.attrs,
                class_onehot: one_hot.clone(),
                kind: PointKind::Virtual,
                source_instance: Some(instance_id),
            });
        }
    }
    Ok(out)
}
