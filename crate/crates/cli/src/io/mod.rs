//! Bit-exact file formats: RTF tensors, CSV tables, PGM masks, calibration
//! JSON, and evaluation reports.

pub mod calib;
pub mod csvio;
pub mod pgm;
pub mod rtf;

use crate::error::CliResult;
use radfuse_core::metrics::EvalReport;
use serde_json::json;
use std::path::Path;

/// Evaluation report as JSON (per-class AP, PR points, mAP).
pub fn report_to_json(report: &EvalReport) -> String {
    let classes: serde_json::Map<String, serde_json::Value> = report
        .per_class
        .iter()
        .map(|(name, curve)| {
            (
                name.clone(),
                json!({
                    "ap": curve.ap,
                    "pr": curve.points.iter().map(|&(r, p)| json!([r, p])).collect::<Vec<_>>(),
                }),
            )
        })
        .collect();
    serde_json::to_string_pretty(&json!({
        "protocol": report.protocol.name(),
        "classes": classes,
        "map": report.map,
    }))
    .expect("report serializes")
}

/// Aligned text table for terminal output.
pub fn report_to_table(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("protocol: {}\n", report.protocol.name()));
    out.push_str(&format!("{:<12} {:>8}\n", "class", "AP"));
    for (name, curve) in &report.per_class {
        out.push_str(&format!("{:<12} {:>8.4}\n", name, curve.ap));
    }
    out.push_str(&format!("{:<12} {:>8.4}\n", "mAP", report.map));
    out
}

pub fn write_report(path: &Path, report: &EvalReport) -> CliResult<()> {
    std::fs::write(path, report_to_json(report))?;
    Ok(())
}
