//! Middlebury `.flo` files: `f32` magic 202021.25, `i32` width, `i32`
//! height, then row-major interleaved `f32` `(u, v)`; all little-endian.

use std::fs;
use std::path::{Path, PathBuf};

use super::frames::{list_sequence, write_atomic, FramePattern};
use crate::error::{Error, Result};
use crate::tensor::FlowField;

pub const FLO_MAGIC: f32 = 202021.25;
const HEADER_LEN: usize = 12;

pub fn flo_bytes(flow: &FlowField) -> Vec<u8> {
    let n = flow.width() * flow.height();
    let mut out = Vec::with_capacity(HEADER_LEN + n * 8);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for (u, v) in flow.u().iter().zip(flow.v()) {
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn parse_flo(path: &Path, bytes: &[u8]) -> Result<FlowField> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(
            path,
            format!(
                "truncated header: {} bytes, expected at least {HEADER_LEN}",
                bytes.len()
            ),
        ));
    }
    let word = |i: usize| [bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]];
    let magic = f32::from_le_bytes(word(0));
    if magic != FLO_MAGIC {
        return Err(Error::format(path, format!("bad magic {magic}, expected {FLO_MAGIC}")));
    }
    let w = i32::from_le_bytes(word(4));
    let h = i32::from_le_bytes(word(8));
    if w <= 0 || h <= 0 {
        return Err(Error::format(path, format!("invalid dimensions {w}x{h}")));
    }
    let (w, h) = (w as usize, h as usize);
    let expected = HEADER_LEN + w * h * 8;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!("payload size mismatch: expected {expected} bytes, got {}", bytes.len()),
        ));
    }
    let mut u = Vec::with_capacity(w * h);
    let mut v = Vec::with_capacity(w * h);
    for px in bytes[HEADER_LEN..].chunks_exact(8) {
        u.push(f32::from_le_bytes([px[0], px[1], px[2], px[3]]));
        v.push(f32::from_le_bytes([px[4], px[5], px[6], px[7]]));
    }
    FlowField::new(w, h, u, v).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_flo(path: &Path) -> Result<FlowField> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_flo(path, &bytes)
}

pub fn write_flo(path: &Path, flow: &FlowField) -> Result<()> {
    write_atomic(path, &flo_bytes(flow))
}

pub fn flow_pattern() -> FramePattern {
    FramePattern::parse("flow_%06d.flo").expect("static pattern")
}

/// Read `flow_%06d.flo` files numbered from 0.
pub fn load_flows(dir: &Path) -> Result<Vec<FlowField>> {
    let paths = list_sequence(dir, &flow_pattern())?;
    let flows = paths.iter().map(|p| read_flo(p)).collect::<Result<Vec<_>>>()?;
    if flows.iter().any(|f| !f.same_size(&flows[0])) {
        return Err(Error::format(dir, "flow files differ in size"));
    }
    Ok(flows)
}

pub fn save_flows(flows: &[FlowField], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let pattern = flow_pattern();
    flows
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(pattern.format(i));
            write_flo(&path, f)?;
            Ok(path)
        })
        .collect()
}
