//! PGM instance-id maps (P2 ASCII and P5 binary, 8- or 16-bit) with a JSON
//! sidecar mapping instance id to class index.

use crate::error::{CliError, CliResult};
use radfuse_core::densify::InstanceMask;
use std::collections::BTreeMap;
use std::path::Path;

pub fn mask_to_pgm_p2(width: usize, height: usize, labels: &[u32]) -> String {
    let maxval = labels.iter().copied().max().unwrap_or(0).max(1);
    let mut out = format!("P2\n{width} {height}\n{maxval}\n");
    for row in 0..height {
        let line: Vec<String> = (0..width)
            .map(|col| labels[row * width + col].to_string())
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn mask_to_pgm_p5(width: usize, height: usize, labels: &[u32]) -> Vec<u8> {
    let maxval = labels.iter().copied().max().unwrap_or(0).max(1);
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    if maxval > 255 {
        for &v in labels {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        }
    } else {
        out.extend(labels.iter().map(|&v| v as u8));
    }
    out
}

/// Parse a P2 or P5 PGM into `(width, height, labels)`.
pub fn parse_pgm(bytes: &[u8]) -> CliResult<(usize, usize, Vec<u32>)> {
    let magic = bytes.get(..2).ok_or_else(|| CliError::format("pgm: empty"))?;
    match magic {
        b"P2" => parse_p2(bytes),
        b"P5" => parse_p5(bytes),
        _ => Err(CliError::format("pgm: expected P2 or P5")),
    }
}

/// Reads header tokens, skipping `#` comments; returns (w, h, maxval, data offset).
fn parse_header(bytes: &[u8]) -> CliResult<(usize, usize, u32, usize)> {
    let mut fields = Vec::with_capacity(3);
    let mut i = 2usize; // past magic
    while fields.len() < 3 && i < bytes.len() {
        while i < bytes.len() && (bytes[i] as char).is_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !(bytes[i] as char).is_whitespace() {
            i += 1;
        }
        if start == i {
            break;
        }
        let tok = std::str::from_utf8(&bytes[start..i])
            .map_err(|_| CliError::format("pgm: non-utf8 header"))?;
        fields.push(
            tok.parse::<u32>()
                .map_err(|_| CliError::format(format!("pgm: bad header token '{tok}'")))?,
        );
    }
    if fields.len() < 3 {
        return Err(CliError::format("pgm: truncated header"));
    }
    // exactly one whitespace byte separates the header from binary data
    i += 1;
    Ok((fields[0] as usize, fields[1] as usize, fields[2], i))
}

fn parse_p2(bytes: &[u8]) -> CliResult<(usize, usize, Vec<u32>)> {
    let text = std::str::from_utf8(bytes).map_err(|_| CliError::format("pgm: non-utf8 P2"))?;
    let mut tokens = text
        .lines()
        .flat_map(|l| l.split('#').next().unwrap_or("").split_whitespace())
        .skip(1); // magic
    let mut next_num = |what: &str| -> CliResult<u32> {
        tokens
            .next()
            .ok_or_else(|| CliError::format(format!("pgm: missing {what}")))?
            .parse::<u32>()
            .map_err(|_| CliError::format(format!("pgm: bad {what}")))
    };
    let w = next_num("width")? as usize;
    let h = next_num("height")? as usize;
    let _maxval = next_num("maxval")?;
    let mut labels = Vec::with_capacity(w * h);
    for _ in 0..w * h {
        labels.push(next_num("pixel")?);
    }
    Ok((w, h, labels))
}

fn parse_p5(bytes: &[u8]) -> CliResult<(usize, usize, Vec<u32>)> {
    let (w, h, maxval, offset) = parse_header(bytes)?;
    let n = w * h;
    let labels = if maxval > 255 {
        if bytes.len() < offset + 2 * n {
            return Err(CliError::format("pgm: truncated P5 payload"));
        }
        (0..n)
            .map(|i| {
                u16::from_be_bytes([bytes[offset + 2 * i], bytes[offset + 2 * i + 1]]) as u32
            })
            .collect()
    } else {
        if bytes.len() < offset + n {
            return Err(CliError::format("pgm: truncated P5 payload"));
        }
        bytes[offset..offset + n].iter().map(|&b| b as u32).collect()
    };
    Ok((w, h, labels))
}

/// Sidecar JSON: `{"3": 0, "7": 2}` maps instance id to class index.
pub fn classes_to_json(classes: &BTreeMap<u32, usize>) -> String {
    let map: BTreeMap<String, usize> = classes.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    serde_json::to_string_pretty(&map).expect("classes serialize")
}

pub fn classes_from_json(text: &str) -> CliResult<BTreeMap<u32, usize>> {
    let map: BTreeMap<String, usize> =
        serde_json::from_str(text).map_err(|e| CliError::format(format!("classes json: {e}")))?;
    let mut out = BTreeMap::new();
    for (k, v) in map {
        let id = k
            .parse::<u32>()
            .map_err(|_| CliError::format(format!("classes json: bad instance id '{k}'")))?;
        out.insert(id, v);
    }
    Ok(out)
}

pub fn write_mask(path: &Path, classes_path: &Path, mask: &InstanceMask) -> CliResult<()> {
    std::fs::write(
        path,
        mask_to_pgm_p5(mask.width(), mask.height(), mask.labels()),
    )?;
    std::fs::write(classes_path, classes_to_json(mask.classes()))?;
    Ok(())
}

pub fn read_mask(path: &Path, classes_path: &Path) -> CliResult<InstanceMask> {
    let (w, h, labels) = parse_pgm(&std::fs::read(path)?)?;
    let classes = classes_from_json(&std::fs::read_to_string(classes_path)?)?;
    InstanceMask::new(w, h, labels, classes).map_err(|e| CliError::format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_and_p5_round_trip() {
        let labels: Vec<u32> = vec![0, 1, 2, 0, 1, 2];
        let p2 = mask_to_pgm_p2(3, 2, &labels);
        let (w, h, back) = parse_pgm(p2.as_bytes()).unwrap();
        assert_eq!((w, h), (3, 2));
        assert_eq!(back, labels);
        let p5 = mask_to_pgm_p5(3, 2, &labels);
        let (w, h, back) = parse_pgm(&p5).unwrap();
        assert_eq!((w, h), (3, 2));
        assert_eq!(back, labels);
    }

    #[test]
    fn sixteen_bit_p5_round_trip() {
        let labels: Vec<u32> = vec![0, 300, 999, 65535];
        let p5 = mask_to_pgm_p5(2, 2, &labels);
        let (_, _, back) = parse_pgm(&p5).unwrap();
        assert_eq!(back, labels);
    }

    #[test]
    fn comments_are_skipped() {
        let text = "P2\n# comment line\n2 2\n5\n1 2\n3 4\n";
        let (_, _, back) = parse_pgm(text.as_bytes()).unwrap();
        assert_eq!(back, vec![1, 2, 3, 4]);
    }

    #[test]
    fn classes_json_round_trip() {
        let mut m = BTreeMap::new();
        m.insert(3u32, 0usize);
        m.insert(7u32, 2usize);
        let text = classes_to_json(&m);
        assert_eq!(classes_from_json(&text).unwrap(), m);
        assert!(classes_from_json("{\"x\": 1}").is_err());
    }
}
