//! Deterministic plot emission: BEV scatter as binary PPM and PR curves as
//! SVG. No display, no timestamps; the same inputs always produce the same
//! bytes.

use crate::synth::RgbImage;
use radfuse_core::densify::{HybridPoint, PointKind};
use radfuse_core::metrics::{EvalReport, GroundTruthBox};

const RAW_COLOR: [u8; 3] = [70, 120, 230]; // blue
const VIRTUAL_COLOR: [u8; 3] = [240, 200, 40]; // yellow
const BOX_COLOR: [u8; 3] = [220, 60, 60]; // red

pub struct BevExtent {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for BevExtent {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 51.2,
            y_min: -25.6,
            y_max: 25.6,
        }
    }
}

struct Canvas {
    img: RgbImage,
    extent: BevExtent,
}

impl Canvas {
    fn new(size: usize, extent: BevExtent) -> Self {
        Self {
            img: RgbImage::filled(size, size, [18, 18, 22]),
            extent,
        }
    }

    /// World (x forward, y left) to raster (forward up, left left).
    fn to_px(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let e = &self.extent;
        if x < e.x_min || x > e.x_max || y < e.y_min || y > e.y_max {
            return None;
        }
        let w = self.img.width as f64;
        let h = self.img.height as f64;
        let col = (e.y_max - y) / (e.y_max - e.y_min) * (w - 1.0);
        let row = (e.x_max - x) / (e.x_max - e.x_min) * (h - 1.0);
        Some((col as usize, row as usize))
    }

    fn dot(&mut self, x: f64, y: f64, rgb: [u8; 3]) {
        if let Some((c, r)) = self.to_px(x, y) {
            for dc in 0..2usize {
                for dr in 0..2usize {
                    let cc = (c + dc).min(self.img.width - 1);
                    let rr = (r + dr).min(self.img.height - 1);
                    self.img.put(cc, rr, rgb);
                }
            }
        }
    }

    fn line(&mut self, a: [f64; 2], b: [f64; 2], rgb: [u8; 3]) {
        let steps = 400usize;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            self.dot(
                a[0] + t * (b[0] - a[0]),
                a[1] + t * (b[1] - a[1]),
                rgb,
            );
        }
    }

    fn legend(&mut self) {
        // three swatches in the top-left corner: raw, virtual, box
        for (i, color) in [RAW_COLOR, VIRTUAL_COLOR, BOX_COLOR].iter().enumerate() {
            for r in 0..10 {
                for c in 0..10 {
                    self.img.put(6 + c, 6 + i * 14 + r, *color);
                }
            }
        }
    }
}

/// Two-layer BEV scatter (raw blue, virtual yellow) with red GT outlines.
pub fn bev_scatter(
    hybrid: &[HybridPoint],
    gt: &[GroundTruthBox],
    extent: BevExtent,
    size: usize,
) -> Vec<u8> {
    let mut canvas = Canvas::new(size, extent);
    for p in hybrid.iter().filter(|p| p.kind == PointKind::Raw) {
        canvas.dot(p.pos[0], p.pos[1], RAW_COLOR);
    }
    for p in hybrid.iter().filter(|p| p.kind == PointKind::Virtual) {
        canvas.dot(p.pos[0], p.pos[1], VIRTUAL_COLOR);
    }
    for g in gt {
        let corners = g.box3d.bev_corners();
        for i in 0..4 {
            canvas.line(corners[i], corners[(i + 1) % 4], BOX_COLOR);
        }
    }
    canvas.legend();
    canvas.img.to_ppm()
}

const CURVE_COLORS: [&str; 4] = ["#d43d3d", "#3c9d3c", "#3c5cd4", "#b48c28"];

/// One PR polyline per class, axes, and AP labels.
pub fn pr_curves_svg(report: &EvalReport) -> String {
    let (w, h) = (480.0, 360.0);
    let (ox, oy) = (50.0, 20.0); // plot origin (top-left of the axis box)
    let (pw, ph) = (400.0, 300.0);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    ));
    // axes
    out.push_str(&format!(
        "<line x1=\"{ox}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        oy + ph,
        ox + pw,
        oy + ph
    ));
    out.push_str(&format!(
        "<line x1=\"{ox}\" y1=\"{oy}\" x2=\"{ox}\" y2=\"{}\" stroke=\"black\"/>\n",
        oy + ph
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">recall</text>\n",
        ox + pw / 2.0 - 18.0,
        oy + ph + 16.0
    ));
    out.push_str(&format!(
        "<text x=\"12\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 12 {})\">precision</text>\n",
        oy + ph / 2.0,
        oy + ph / 2.0
    ));
    for (ci, (name, curve)) in report.per_class.iter().enumerate() {
        let color = CURVE_COLORS[ci % CURVE_COLORS.len()];
        if !curve.points.is_empty() {
            let pts: Vec<String> = std::iter::once((0.0, 1.0))
                .chain(curve.points.iter().copied())
                .map(|(r, p)| {
                    format!(
                        "{:.2},{:.2}",
                        ox + r * pw,
                        oy + (1.0 - p) * ph
                    )
                })
                .collect();
            out.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                pts.join(" ")
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{name} AP={:.4}</text>\n",
            ox + pw - 150.0,
            oy + 14.0 + 14.0 * ci as f64,
            curve.ap
        ));
    }
    out.push_str(&format!(
        "<text x=\"{ox}\" y=\"14\" font-size=\"12\">{} mAP={:.4}</text>\n",
        report.protocol.name(),
        report.map
    ));
    out.push_str("</svg>\n");
    out
}
