//! Rotated-box IoU, 40-point interpolated average precision, and the
//! region-filtered evaluation protocols (entire annotated area, driving
//! corridor, 70 m range).

use crate::boxes::Box3D;
use crate::error::MetricsError;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// A scored detection box.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub box3d: Box3D,
    pub score: f32,
    pub class: usize,
}

/// An annotated ground-truth box.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthBox {
    pub box3d: Box3D,
    pub class: usize,
}

/// Axis mapping for the driving-corridor predicate, applied verbatim on the
/// dataset frame: `-4 < c[lateral] < 4` and `c[forward] < 25` (meters).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DcaAxes {
    pub lateral: usize,
    pub forward: usize,
}

impl Default for DcaAxes {
    fn default() -> Self {
        Self {
            lateral: 0,
            forward: 2,
        }
    }
}

/// True when a box center lies in the driving-corridor region.
pub fn in_dca(center: [f64; 3], axes: DcaAxes) -> bool {
    let lat = center[axes.lateral];
    let fwd = center[axes.forward];
    lat > -4.0 && lat < 4.0 && fwd < 25.0
}

/// True when a box center lies within 70 m ground-plane range.
pub fn in_range_70m(center: [f64; 3]) -> bool {
    libm::sqrt(center[0] * center[0] + center[1] * center[1]) < 70.0
}

fn polygon_area(pts: &[[f64; 2]]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..pts.len() {
        let j = (i + 1) % pts.len();
        acc += pts[i][0] * pts[j][1] - pts[j][0] * pts[i][1];
    }
    libm::fabs(acc) / 2.0
}

/// Clip `subject` against the half-plane left of the directed edge `a -> b`.
fn clip_edge(subject: &[[f64; 2]], a: [f64; 2], b: [f64; 2]) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(subject.len() + 1);
    let side = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    for i in 0..subject.len() {
        let cur = subject[i];
        let prev = subject[(i + subject.len() - 1) % subject.len()];
        let sc = side(cur);
        let sp = side(prev);
        if sc >= 0.0 {
            if sp < 0.0 {
                out.push(intersect(prev, cur, a, b));
            }
            out.push(cur);
        } else if sp >= 0.0 {
            out.push(intersect(prev, cur, a, b));
        }
    }
    out
}

fn intersect(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let r = [q[0] - p[0], q[1] - p[1]];
    let s = [b[0] - a[0], b[1] - a[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    // callers only hit this with a genuine crossing; denom stays away from 0
    let t = ((a[0] - p[0]) * s[1] - (a[1] - p[1]) * s[0]) / denom;
    [p[0] + t * r[0], p[1] + t * r[1]]
}

/// Exact rotated-rectangle intersection area via convex polygon clipping.
pub fn bev_intersection_area(a: &Box3D, b: &Box3D) -> f64 {
    let mut poly: Vec<[f64; 2]> = a.bev_corners().to_vec();
    let clip = b.bev_corners();
    for i in 0..4 {
        if poly.is_empty() {
            return 0.0;
        }
        poly = clip_edge(&poly, clip[i], clip[(i + 1) % 4]);
    }
    polygon_area(&poly)
}

/// Lexicographic key so that `bev_iou(a, b)` evaluates the identical
/// expression as `bev_iou(b, a)`.
fn canonical_order<'a>(a: &'a Box3D, b: &'a Box3D) -> (&'a Box3D, &'a Box3D) {
    let key = |x: &Box3D| {
        [
            x.center[0], x.center[1], x.center[2], x.size[0], x.size[1], x.size[2], x.yaw,
        ]
    };
    let (ka, kb) = (key(a), key(b));
    for i in 0..7 {
        match ka[i].total_cmp(&kb[i]) {
            core::cmp::Ordering::Less => return (a, b),
            core::cmp::Ordering::Greater => return (b, a),
            core::cmp::Ordering::Equal => {}
        }
    }
    (a, b)
}

/// Rotated BEV IoU in `[0, 1]`, exactly symmetric in its arguments.
pub fn bev_iou(a: &Box3D, b: &Box3D) -> f64 {
    let (p, q) = canonical_order(a, b);
    let inter = bev_intersection_area(p, q);
    let union = p.bev_area() + q.bev_area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// 3D IoU: BEV intersection area times vertical overlap, over the union of
/// volumes.
pub fn iou3d(a: &Box3D, b: &Box3D) -> f64 {
    let (p, q) = canonical_order(a, b);
    let inter_bev = bev_intersection_area(p, q);
    let [pz0, pz1] = p.z_interval();
    let [qz0, qz1] = q.z_interval();
    let dz = (pz1.min(qz1) - pz0.max(qz0)).max(0.0);
    let inter = inter_bev * dz;
    let union = p.volume() + q.volume() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// A precision/recall curve with its 40-point interpolated AP.
#[derive(Clone, Debug, PartialEq)]
pub struct PRCurve {
    /// `(recall, precision)` pairs in detection-score order; recall is
    /// nondecreasing.
    pub points: Vec<(f64, f64)>,
    pub ap: f64,
}

/// Which overlap measure average precision uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IouKind {
    Bev,
    Volume,
}

impl IouKind {
    pub fn eval(self, a: &Box3D, b: &Box3D) -> f64 {
        match self {
            IouKind::Bev => bev_iou(a, b),
            IouKind::Volume => iou3d(a, b),
        }
    }
}

/// Greedy matching by descending score (ties by input order): each detection
/// takes the best-IoU unmatched ground truth of its own class when that IoU
/// reaches `threshold`. AP is the mean interpolated precision at recalls
/// 1/40 .. 40/40.
pub fn average_precision(
    dets: &[Detection],
    gts: &[GroundTruthBox],
    iou: IouKind,
    threshold: f64,
) -> PRCurve {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score).then(a.cmp(&b)));
    let mut matched = vec![false; gts.len()];
    let n_pos = gts.len();
    let mut points = Vec::with_capacity(dets.len());
    let mut tp = 0usize;
    for (rank, &di) in order.iter().enumerate() {
        let det = &dets[di];
        let mut best: Option<(f64, usize)> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if matched[gi] || gt.class != det.class {
                continue;
            }
            let v = iou.eval(&det.box3d, &gt.box3d);
            if v >= threshold {
                let better = match best {
                    None => true,
                    Some((bv, _)) => v > bv,
                };
                if better {
                    best = Some((v, gi));
                }
            }
        }
        if let Some((_, gi)) = best {
            matched[gi] = true;
            tp += 1;
        }
        let precision = tp as f64 / (rank + 1) as f64;
        let recall = if n_pos > 0 { tp as f64 / n_pos as f64 } else { 0.0 };
        points.push((recall, precision));
    }
    let ap = interpolated_ap_40(&points);
    PRCurve { points, ap }
}

/// 40-point interpolation: mean over recall samples `i/40`, `i = 1..=40`, of
/// the max precision at recall at or beyond the sample.
fn interpolated_ap_40(points: &[(f64, f64)]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 1..=40 {
        let r = i as f64 / 40.0;
        let mut best = 0.0f64;
        for &(recall, precision) in points {
            if recall + 1e-12 >= r && precision > best {
                best = precision;
            }
        }
        acc += best;
    }
    acc / 40.0
}

/// Evaluation region protocols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    /// Entire annotated area: no region filter.
    VodEaa,
    /// Driving corridor: `-4 < lateral < 4` and `forward < 25` on both
    /// detections and ground truth.
    VodDca,
    /// 70 m ground-plane range on both sides.
    Tj4d,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::VodEaa => "vod_eaa",
            Protocol::VodDca => "vod_dca",
            Protocol::Tj4d => "tj4d",
        }
    }
}

/// Per-class name and IoU threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassSpec {
    pub name: String,
    pub iou_threshold: f64,
}

/// Default class table: car 0.5, pedestrian 0.25, cyclist 0.25, truck 0.5.
pub fn default_classes(n: usize) -> Vec<ClassSpec> {
    let all = [
        ("car", 0.5),
        ("pedestrian", 0.25),
        ("cyclist", 0.25),
        ("truck", 0.5),
    ];
    all[..n]
        .iter()
        .map(|(name, t)| ClassSpec {
            name: String::from(*name),
            iou_threshold: *t,
        })
        .collect()
}

/// Evaluation output: one PR curve per class plus the unweighted mean AP.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub per_class: Vec<(String, PRCurve)>,
    pub map: f64,
}

/// Run a full protocol evaluation.
///
/// Applies the protocol's region filter to detections and ground truth,
/// computes per-class AP at each class's threshold with the given IoU kind,
/// and averages APs without weighting. Any class index outside the table is
/// an error.
pub fn evaluate(
    dets: &[Detection],
    gts: &[GroundTruthBox],
    protocol: Protocol,
    classes: &[ClassSpec],
    iou: IouKind,
    dca: DcaAxes,
) -> Result<EvalReport, MetricsError> {
    for d in dets {
        if d.class >= classes.len() {
            return Err(MetricsError::UnknownClass {
                class: format!("id {}", d.class),
            });
        }
    }
    for g in gts {
        if g.class >= classes.len() {
            return Err(MetricsError::UnknownClass {
                class: format!("id {}", g.class),
            });
        }
    }
    let keep = |c: [f64; 3]| match protocol {
        Protocol::VodEaa => true,
        Protocol::VodDca => in_dca(c, dca),
        Protocol::Tj4d => in_range_70m(c),
    };
    let dets: Vec<&Detection> = dets.iter().filter(|d| keep(d.box3d.center)).collect();
    let gts: Vec<&GroundTruthBox> = gts.iter().filter(|g| keep(g.box3d.center)).collect();

    let mut per_class = Vec::with_capacity(classes.len());
    let mut total = 0.0;
    for (ci, spec) in classes.iter().enumerate() {
        let cd: Vec<Detection> = dets
            .iter()
            .filter(|d| d.class == ci)
            .map(|d| (*d).clone())
            .collect();
        let cg: Vec<GroundTruthBox> = gts
            .iter()
            .filter(|g| g.class == ci)
            .map(|g| (*g).clone())
            .collect();
        let curve = average_precision(&cd, &cg, iou, spec.iou_threshold);
        total += curve.ap;
        per_class.push((spec.name.clone(), curve));
    }
    let map = total / classes.len() as f64;
    Ok(EvalReport {
        protocol,
        per_class,
        map,
    })
}
