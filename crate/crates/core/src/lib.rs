//! Deterministic kernels for a 4D-radar + camera fusion 3D detection
//! pipeline: instance-guided point densification, triple-attention voxel
//! encoding, deformable-attention scene and proposal fusion, and rotated-box
//! detection metrics.
//!
//! The crate is `no_std`-compatible (`alloc` required); all float math goes
//! through `libm` so results are bit-identical with or without `std`. Every
//! operation is a pure function of its inputs and an immutable [`tensor::ParamStore`],
//! and all randomness flows through keyed [`rng::SplitMix64`] streams, so any
//! parallel map over frames, voxels, or proposals reproduces the sequential
//! output exactly.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod boxes;
pub mod densify;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod proposal_fusion;
pub mod rng;
pub mod scene_fusion;
pub mod tensor;
pub mod voxel;
