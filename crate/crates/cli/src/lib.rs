//! IO, configuration, synthetic scenes, and end-to-end orchestration for
//! the radfuse detection pipeline. The algorithmic kernels live in
//! `radfuse-core`; this crate owns every file format and the CLI.

pub mod checks;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod plot;
pub mod synth;
