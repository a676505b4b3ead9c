//! "RTF" tensor container: magic `RTF1`, u8 dtype (0 = f32), u8 ndim,
//! ndim x u32 LE dims, then the row-major f32 LE payload.

use crate::error::{CliError, CliResult};
use radfuse_core::tensor::Tensor;
use std::path::Path;

pub fn to_bytes(t: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(6 + 4 * t.rank() + 4 * t.len());
    out.extend_from_slice(b"RTF1");
    out.push(0u8); // f32
    out.push(t.rank() as u8);
    for &d in t.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> CliResult<Tensor> {
    if bytes.len() < 6 || &bytes[..4] != b"RTF1" {
        return Err(CliError::format("rtf: bad magic"));
    }
    if bytes[4] != 0 {
        return Err(CliError::format(format!("rtf: unsupported dtype {}", bytes[4])));
    }
    let ndim = bytes[5] as usize;
    let header = 6 + 4 * ndim;
    if bytes.len() < header {
        return Err(CliError::format("rtf: truncated dims"));
    }
    let mut dims = Vec::with_capacity(ndim);
    for i in 0..ndim {
        let off = 6 + 4 * i;
        dims.push(u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize);
    }
    let count: usize = dims.iter().product();
    if bytes.len() != header + 4 * count {
        return Err(CliError::format(format!(
            "rtf: payload is {} bytes, dims need {}",
            bytes.len() - header,
            4 * count
        )));
    }
    let data: Vec<f32> = (0..count)
        .map(|i| {
            let off = header + 4 * i;
            f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap())
        })
        .collect();
    Tensor::new(dims, data).map_err(|e| CliError::format(e.to_string()))
}

pub fn write(path: &Path, t: &Tensor) -> CliResult<()> {
    std::fs::write(path, to_bytes(t))?;
    Ok(())
}

pub fn read(path: &Path) -> CliResult<Tensor> {
    from_bytes(&std::fs::read(path)?)
}
