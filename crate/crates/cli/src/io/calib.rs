//! Calibration JSON: `{"intr": [12 reals row-major], "r2c": [16 reals]}`.

use crate::error::{CliError, CliResult};
use radfuse_core::geometry::Calibration;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct CalibJson {
    intr: Vec<f64>,
    r2c: Vec<f64>,
}

pub fn to_json(cal: &Calibration) -> String {
    let j = CalibJson {
        intr: cal.intr.iter().flatten().copied().collect(),
        r2c: cal.r2c.iter().flatten().copied().collect(),
    };
    serde_json::to_string_pretty(&j).expect("calibration serializes")
}

pub fn from_json(text: &str) -> CliResult<Calibration> {
    let j: CalibJson =
        serde_json::from_str(text).map_err(|e| CliError::format(format!("calibration: {e}")))?;
    let cal = Calibration::from_rows(&j.intr, &j.r2c).map_err(|e| CliError::format(e.to_string()))?;
    if !radfuse_core::geometry::validate(&cal, false) {
        return Err(CliError::format(
            "calibration: r2c bottom row must be [0, 0, 0, 1]",
        ));
    }
    Ok(cal)
}

pub fn write(path: &Path, cal: &Calibration) -> CliResult<()> {
    std::fs::write(path, to_json(cal))?;
    Ok(())
}

pub fn read(path: &Path) -> CliResult<Calibration> {
    from_json(&std::fs::read_to_string(path)?)
}
