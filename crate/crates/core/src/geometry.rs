//! Calibration handling and the pinhole projection / inverse reprojection
//! shared by densification and both fusion stages.
//!
//! Convention, fixed once for the whole pipeline: `(u, v) = (column, row)`,
//! origin at the image top-left, continuous coordinates at pixel centers.
//! Projection math runs in f64 so the round trip is exact to well below a
//! micrometer at scene ranges.

use crate::error::GeometryError;
use alloc::vec::Vec;

/// Depth below which a point counts as behind the camera and is dropped.
pub const DEPTH_GUARD: f64 = 1e-6;

/// Camera intrinsic 3x4 and radar-to-camera 4x4 matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    /// Intrinsic matrix, row-major 3x4.
    pub intr: [[f64; 4]; 3],
    /// Radar-to-camera rigid transform, row-major 4x4.
    pub r2c: [[f64; 4]; 4],
}

/// A projected point: continuous pixel coordinates plus camera depth.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
    pub d: f64,
    /// Carried-through feature vector (radar attributes).
    pub attrs: Vec<f32>,
}

/// Result of projecting a 3D point.
#[derive(Clone, Debug, PartialEq)]
pub enum Projected {
    /// In front of the camera; coordinates valid.
    Pixel { u: f64, v: f64, d: f64 },
    /// Camera depth at or below the guard; the point never reaches the image.
    Dropped,
}

impl Projected {
    pub fn pixel(&self) -> Option<(f64, f64, f64)> {
        match *self {
            Projected::Pixel { u, v, d } => Some((u, v, d)),
            Projected::Dropped => None,
        }
    }
}

impl Calibration {
    pub fn new(intr: [[f64; 4]; 3], r2c: [[f64; 4]; 4]) -> Self {
        Self { intr, r2c }
    }

    pub fn from_rows(intr: &[f64], r2c: &[f64]) -> Result<Self, GeometryError> {
        if intr.len() != 12 {
            return Err(GeometryError::BadMatrixLength {
                which: "intr",
                expected: 12,
                got: intr.len(),
            });
        }
        if r2c.len() != 16 {
            return Err(GeometryError::BadMatrixLength {
                which: "r2c",
                expected: 16,
                got: r2c.len(),
            });
        }
        let mut i = [[0.0; 4]; 3];
        let mut e = [[0.0; 4]; 4];
        for r in 0..3 {
            i[r].copy_from_slice(&intr[r * 4..(r + 1) * 4]);
        }
        for r in 0..4 {
            e[r].copy_from_slice(&r2c[r * 4..(r + 1) * 4]);
        }
        Ok(Self { intr: i, r2c: e })
    }

    /// Combined 3x4 map `intr * r2c`.
    fn combined(&self) -> [[f64; 4]; 3] {
        let mut m = [[0.0; 4]; 3];
        for r in 0..3 {
            for c in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += self.intr[r][k] * self.r2c[k][c];
                }
                m[r][c] = acc;
            }
        }
        m
    }
}

/// Project a radar-frame point into the image: `[u d, v d, d]^T = intr *
/// r2c * [x y z 1]^T`, then divide by `d`. Returns [`Projected::Dropped`]
/// when `d <= DEPTH_GUARD`.
pub fn project(p: [f64; 3], cal: &Calibration) -> Projected {
    let m = cal.combined();
    let h = [p[0], p[1], p[2], 1.0];
    let mut uvd = [0.0f64; 3];
    for r in 0..3 {
        uvd[r] = m[r][0] * h[0] + m[r][1] * h[1] + m[r][2] * h[2] + m[r][3];
    }
    let d = uvd[2];
    if d <= DEPTH_GUARD {
        return Projected::Dropped;
    }
    Projected::Pixel {
        u: uvd[0] / d,
        v: uvd[1] / d,
        d,
    }
}

/// Exact algebraic inverse of [`project`]: recover the camera-frame ray from
/// `(u, v, d)` through the inverse intrinsic block, then apply `r2c^-1`.
///
/// Fails if the intrinsic left 3x3 block or the extrinsic matrix is singular.
pub fn reproject(u: f64, v: f64, d: f64, cal: &Calibration) -> Result<[f64; 3], GeometryError> {
    // Solve intr[:, :3] * X_c = [u d, v d, d] - intr[:, 3]
    let k = [
        [cal.intr[0][0], cal.intr[0][1], cal.intr[0][2]],
        [cal.intr[1][0], cal.intr[1][1], cal.intr[1][2]],
        [cal.intr[2][0], cal.intr[2][1], cal.intr[2][2]],
    ];
    let rhs = [
        u * d - cal.intr[0][3],
        v * d - cal.intr[1][3],
        d - cal.intr[2][3],
    ];
    let xc = solve3(k, rhs).ok_or(GeometryError::SingularIntrinsics)?;
    // [x y z 1] = r2c^-1 * [X_c 1]
    let inv = invert4(&cal.r2c).ok_or(GeometryError::SingularExtrinsics)?;
    let hc = [xc[0], xc[1], xc[2], 1.0];
    let mut out = [0.0f64; 3];
    for r in 0..3 {
        out[r] = inv[r][0] * hc[0] + inv[r][1] * hc[1] + inv[r][2] * hc[2] + inv[r][3];
    }
    Ok(out)
}

/// Solve a 3x3 system by Cramer's rule. None if the determinant underflows.
fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = det3(&a);
    if libm::fabs(det) < 1e-12 {
        return None;
    }
    let mut out = [0.0f64; 3];
    for col in 0..3 {
        let mut m = a;
        for r in 0..3 {
            m[r][col] = b[r];
        }
        out[col] = det3(&m) / det;
    }
    Some(out)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Gauss-Jordan 4x4 inverse with partial pivoting.
fn invert4(m: &[[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut a = *m;
    let mut inv = [[0.0f64; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let mut pivot = col;
        for r in col + 1..4 {
            if libm::fabs(a[r][col]) > libm::fabs(a[pivot][col]) {
                pivot = r;
            }
        }
        if libm::fabs(a[pivot][col]) < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for c in 0..4 {
            a[col][c] /= p;
            inv[col][c] /= p;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..4 {
                        a[r][c] -= f * a[col][c];
                        inv[r][c] -= f * inv[col][c];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Checks the structural invariants the pipeline relies on: bottom row of
/// r2c is [0 0 0 1] and, when `rigid` is claimed, the rotation block has
/// unit determinant.
pub fn validate(cal: &Calibration, rigid: bool) -> bool {
    let bottom_ok = (0..3).all(|c| libm::fabs(cal.r2c[3][c]) <= 1e-9)
        && libm::fabs(cal.r2c[3][3] - 1.0) <= 1e-9;
    if !bottom_ok {
        return false;
    }
    if rigid {
        let r = [
            [cal.r2c[0][0], cal.r2c[0][1], cal.r2c[0][2]],
            [cal.r2c[1][0], cal.r2c[1][1], cal.r2c[1][2]],
            [cal.r2c[2][0], cal.r2c[2][1], cal.r2c[2][2]],
        ];
        if libm::fabs(libm::fabs(det3(&r)) - 1.0) > 1e-6 {
            return false;
        }
    }
    true
}

/// Identity extrinsics, pinhole intrinsics with focal `(fx, fy)` and
/// principal point `(cx, cy)`.
pub fn pinhole(fx: f64, fy: f64, cx: f64, cy: f64) -> Calibration {
    Calibration {
        intr: [
            [fx, 0.0, cx, 0.0],
            [0.0, fy, cy, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ],
        r2c: [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
    }
}
