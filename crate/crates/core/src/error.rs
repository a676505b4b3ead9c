//! Error types shared across the crate.

use alloc::string::String;
use core::fmt;

/// Errors from tensor ops and the parameter store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TensorError {
    /// Trailing/declared dimension mismatch. Names both dims.
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    /// Data length does not match the product of dims.
    DataLength { expected: usize, got: usize },
    /// Axis index out of range for the tensor rank.
    InvalidAxis { axis: usize, rank: usize },
    /// Softmax or pooling over an axis of extent zero.
    EmptyAxis { axis: usize },
    /// Softmax called with no axes.
    NoAxes,
    /// A referenced parameter path was never declared.
    MissingParam { path: String },
    /// The same parameter path was declared twice.
    DuplicateParam { path: String },
    /// jvp_check was asked to differentiate an unsupported op.
    UnsupportedJvpOp { op: &'static str },
}

impl fmt::Display for TensorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorError::ShapeMismatch {
                context,
                expected,
                got,
            } => write!(f, "{context}: expected dim {expected}, got {got}"),
            TensorError::DataLength { expected, got } => {
                write!(f, "data length {got} does not match dims product {expected}")
            }
            TensorError::InvalidAxis { axis, rank } => {
                write!(f, "axis {axis} out of range for rank {rank}")
            }
            TensorError::EmptyAxis { axis } => write!(f, "axis {axis} has extent 0"),
            TensorError::NoAxes => write!(f, "softmax requires at least one axis"),
            TensorError::MissingParam { path } => write!(f, "parameter '{path}' not declared"),
            TensorError::DuplicateParam { path } => {
                write!(f, "parameter '{path}' declared twice")
            }
            TensorError::UnsupportedJvpOp { op } => {
                write!(f, "jvp_check does not support op '{op}'")
            }
        }
    }
}

/// Errors from calibration handling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeometryError {
    /// The intrinsic 3x3 block is singular; reprojection is undefined.
    SingularIntrinsics,
    /// The radar-to-camera matrix is not invertible.
    SingularExtrinsics,
    /// Calibration payload had the wrong element count.
    BadMatrixLength { which: &'static str, expected: usize, got: usize },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::SingularIntrinsics => write!(f, "intrinsic 3x3 block is singular"),
            GeometryError::SingularExtrinsics => write!(f, "radar-to-camera matrix is singular"),
            GeometryError::BadMatrixLength {
                which,
                expected,
                got,
            } => write!(f, "{which} expects {expected} values, got {got}"),
        }
    }
}

/// Errors from densification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensifyError {
    /// Point attribute width differs from the configured dataset schema.
    SchemaMismatch { expected: usize, got: usize },
    /// A mask label has no class entry.
    UnlabeledInstance { instance: u32 },
    /// A mask class index does not fit the configured one-hot width.
    ClassOutOfRange { class: usize, n_classes: usize },
    /// Reprojection failed (degenerate calibration).
    Geometry(GeometryError),
}

impl fmt::Display for DensifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensifyError::SchemaMismatch { expected, got } => write!(
                f,
                "point attribute width {got} does not match schema width {expected}"
            ),
            DensifyError::UnlabeledInstance { instance } => {
                write!(f, "mask instance {instance} has no class entry")
            }
            DensifyError::ClassOutOfRange { class, n_classes } => {
                write!(f, "class index {class} exceeds one-hot width {n_classes}")
            }
            DensifyError::Geometry(e) => write!(f, "geometry: {e}"),
        }
    }
}

impl From<GeometryError> for DensifyError {
    fn from(e: GeometryError) -> Self {
        DensifyError::Geometry(e)
    }
}

/// Errors from the evaluation protocol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricsError {
    /// A detection or ground-truth box carries a class outside the protocol.
    UnknownClass { class: String },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::UnknownClass { class } => write!(f, "unknown class '{class}'"),
        }
    }
}

#[cfg(feature = "std")]
mod std_impls {
    use super::*;
    impl std::error::Error for TensorError {}
    impl std::error::Error for GeometryError {}
    impl std::error::Error for DensifyError {}
    impl std::error::Error for MetricsError {}
}
