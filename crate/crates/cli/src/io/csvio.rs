//! CSV formats: radar points (schema header), hybrid points (appended
//! one-hot columns), detections / ground truth boxes, and voxel coordinate
//! tables. All floats print via Rust's shortest round-trip formatting so a
//! write/read cycle is lossless.

use crate::config::{class_id, class_name};
use crate::error::{CliError, CliResult};
use radfuse_core::boxes::Box3D;
use radfuse_core::densify::{HybridPoint, PointKind, RadarPoint};
use radfuse_core::metrics::{Detection, GroundTruthBox};
use std::path::Path;

fn parse_f64(field: &str, line: usize) -> CliResult<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::format(format!("line {line}: bad number '{field}'")))
}

fn parse_f32(field: &str, line: usize) -> CliResult<f32> {
    field
        .trim()
        .parse::<f32>()
        .map_err(|_| CliError::format(format!("line {line}: bad number '{field}'")))
}

// ---- radar points ---------------------------------------------------------

/// Header row is the schema token (`vod7` | `tj4d8`).
pub fn points_to_csv(points: &[RadarPoint], schema_token: &str) -> String {
    let mut out = String::from(schema_token);
    out.push('\n');
    for p in points {
        out.push_str(&format!("{},{},{}", p.pos[0], p.pos[1], p.pos[2]));
        for a in &p.attrs {
            out.push_str(&format!(",{a}"));
        }
        out.push('\n');
    }
    out
}

pub fn points_from_csv(text: &str) -> CliResult<(String, Vec<RadarPoint>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::format("points csv: empty file"))?;
    let token = header.trim().to_string();
    let attr_len = match token.as_str() {
        "vod7" => 4,
        "tj4d8" => 5,
        other => return Err(CliError::format(format!("points csv: unknown schema '{other}'"))),
    };
    let mut points = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 + attr_len {
            return Err(CliError::format(format!(
                "line {}: expected {} fields, got {}",
                ln + 1,
                3 + attr_len,
                fields.len()
            )));
        }
        let pos = [
            parse_f64(fields[0], ln + 1)?,
            parse_f64(fields[1], ln + 1)?,
            parse_f64(fields[2], ln + 1)?,
        ];
        let attrs = fields[3..]
            .iter()
            .map(|f| parse_f32(f, ln + 1))
            .collect::<CliResult<Vec<f32>>>()?;
        points.push(RadarPoint { pos, attrs });
    }
    Ok((token, points))
}

pub fn write_points(path: &Path, points: &[RadarPoint], schema_token: &str) -> CliResult<()> {
    std::fs::write(path, points_to_csv(points, schema_token))?;
    Ok(())
}

pub fn read_points(path: &Path) -> CliResult<(String, Vec<RadarPoint>)> {
    points_from_csv(&std::fs::read_to_string(path)?)
}

// ---- hybrid points --------------------------------------------------------

/// Header row: `<schema>+e<classes>+r2`, e.g. `vod7+e3+r2`.
pub fn hybrid_to_csv(points: &[HybridPoint], schema_token: &str, n_classes: usize) -> String {
    let mut out = format!("{schema_token}+e{n_classes}+r2\n");
    for p in points {
        out.push_str(&format!("{},{},{}", p.pos[0], p.pos[1], p.pos[2]));
        for a in &p.attrs {
            out.push_str(&format!(",{a}"));
        }
        for e in &p.class_onehot {
            out.push_str(&format!(",{e}"));
        }
        for r in p.kind.one_hot() {
            out.push_str(&format!(",{r}"));
        }
        out.push('\n');
    }
    out
}

pub fn hybrid_from_csv(text: &str) -> CliResult<(String, usize, Vec<HybridPoint>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::format("hybrid csv: empty file"))?;
    let header = header.trim();
    let parts: Vec<&str> = header.split('+').collect();
    if parts.len() != 3 || !parts[1].starts_with('e') || parts[2] != "r2" {
        return Err(CliError::format(format!("hybrid csv: bad header '{header}'")));
    }
    let token = parts[0].to_string();
    let attr_len = match token.as_str() {
        "vod7" => 4,
        "tj4d8" => 5,
        other => return Err(CliError::format(format!("hybrid csv: unknown schema '{other}'"))),
    };
    let n_classes: usize = parts[1][1..]
        .parse()
        .map_err(|_| CliError::format(format!("hybrid csv: bad header '{header}'")))?;
    let width = 3 + attr_len + n_classes + 2;
    let mut points = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(CliError::format(format!(
                "line {}: expected {width} fields, got {}",
                ln + 1,
                fields.len()
            )));
        }
        let pos = [
            parse_f64(fields[0], ln + 1)?,
            parse_f64(fields[1], ln + 1)?,
            parse_f64(fields[2], ln + 1)?,
        ];
        let attrs = fields[3..3 + attr_len]
            .iter()
            .map(|f| parse_f32(f, ln + 1))
            .collect::<CliResult<Vec<f32>>>()?;
        let class_onehot = fields[3 + attr_len..3 + attr_len + n_classes]
            .iter()
            .map(|f| parse_f32(f, ln + 1))
            .collect::<CliResult<Vec<f32>>>()?;
        let raw = parse_f32(fields[width - 2], ln + 1)?;
        let kind = if raw == 1.0 {
            PointKind::Raw
        } else {
            PointKind::Virtual
        };
        points.push(HybridPoint {
            pos,
            attrs,
            class_onehot,
            kind,
            source_instance: None,
        });
    }
    Ok((token, n_classes, points))
}

pub fn write_hybrid(
    path: &Path,
    points: &[HybridPoint],
    schema_token: &str,
    n_classes: usize,
) -> CliResult<()> {
    std::fs::write(path, hybrid_to_csv(points, schema_token, n_classes))?;
    Ok(())
}

pub fn read_hybrid(path: &Path) -> CliResult<(String, usize, Vec<HybridPoint>)> {
    hybrid_from_csv(&std::fs::read_to_string(path)?)
}

// ---- boxes (detections and ground truth) ----------------------------------

pub const BOX_HEADER: &str = "x,y,z,l,w,h,yaw,score,class";

fn box_line(b: &Box3D, score: f32, class: usize) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}\n",
        b.center[0],
        b.center[1],
        b.center[2],
        b.size[0],
        b.size[1],
        b.size[2],
        b.yaw,
        score,
        class_name(class).unwrap_or("unknown")
    )
}

pub fn detections_to_csv(dets: &[Detection]) -> String {
    let mut out = String::from(BOX_HEADER);
    out.push('\n');
    for d in dets {
        out.push_str(&box_line(&d.box3d, d.score, d.class));
    }
    out
}

pub fn ground_truth_to_csv(gts: &[GroundTruthBox]) -> String {
    let mut out = String::from(BOX_HEADER);
    out.push('\n');
    for g in gts {
        out.push_str(&box_line(&g.box3d, 1.0, g.class));
    }
    out
}

fn boxes_from_csv(text: &str) -> CliResult<Vec<(Box3D, f32, usize)>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::format("box csv: empty file"))?;
    if header.trim() != BOX_HEADER {
        return Err(CliError::format(format!("box csv: bad header '{header}'")));
    }
    let mut out = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(CliError::format(format!(
                "line {}: expected 9 fields, got {}",
                ln + 1,
                fields.len()
            )));
        }
        let center = [
            parse_f64(fields[0], ln + 1)?,
            parse_f64(fields[1], ln + 1)?,
            parse_f64(fields[2], ln + 1)?,
        ];
        let size = [
            parse_f64(fields[3], ln + 1)?,
            parse_f64(fields[4], ln + 1)?,
            parse_f64(fields[5], ln + 1)?,
        ];
        let yaw = parse_f64(fields[6], ln + 1)?;
        let score = parse_f32(fields[7], ln + 1)?;
        let class = class_id(fields[8].trim()).ok_or_else(|| {
            CliError::format(format!("line {}: unknown class '{}'", ln + 1, fields[8]))
        })?;
        out.push((Box3D::new(center, size, yaw), score, class));
    }
    Ok(out)
}

pub fn detections_from_csv(text: &str) -> CliResult<Vec<Detection>> {
    Ok(boxes_from_csv(text)?
        .into_iter()
        .map(|(box3d, score, class)| Detection { box3d, score, class })
        .collect())
}

pub fn ground_truth_from_csv(text: &str) -> CliResult<Vec<GroundTruthBox>> {
    Ok(boxes_from_csv(text)?
        .into_iter()
        .map(|(box3d, _, class)| GroundTruthBox { box3d, class })
        .collect())
}

pub fn write_detections(path: &Path, dets: &[Detection]) -> CliResult<()> {
    std::fs::write(path, detections_to_csv(dets))?;
    Ok(())
}

pub fn read_detections(path: &Path) -> CliResult<Vec<Detection>> {
    detections_from_csv(&std::fs::read_to_string(path)?)
}

pub fn write_ground_truth(path: &Path, gts: &[GroundTruthBox]) -> CliResult<()> {
    std::fs::write(path, ground_truth_to_csv(gts))?;
    Ok(())
}

pub fn read_ground_truth(path: &Path) -> CliResult<Vec<GroundTruthBox>> {
    ground_truth_from_csv(&std::fs::read_to_string(path)?)
}

// ---- voxel coordinate table -----------------------------------------------

pub fn coords_to_csv(coords: &[[i32; 3]]) -> String {
    let mut out = String::from("ix,iy,iz\n");
    for c in coords {
        out.push_str(&format!("{},{},{}\n", c[0], c[1], c[2]));
    }
    out
}

pub fn coords_from_csv(text: &str) -> CliResult<Vec<[i32; 3]>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::format("coords csv: empty file"))?;
    if header.trim() != "ix,iy,iz" {
        return Err(CliError::format(format!("coords csv: bad header '{header}'")));
    }
    let mut out = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::format(format!("line {}: expected 3 fields", ln + 1)));
        }
        let mut c = [0i32; 3];
        for (slot, f) in c.iter_mut().zip(&fields) {
            *slot = f
                .trim()
                .parse()
                .map_err(|_| CliError::format(format!("line {}: bad index '{f}'", ln + 1)))?;
        }
        out.push(c);
    }
    Ok(out)
}
