//! Numbered PNG frame directories and atomic file writes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::{ColorType, ImageEncoder};

use crate::error::{Error, Result};
use crate::tensor::{Frame, FrameSequence, PixelLayout};

/// Frame rate assumed for PNG sequences, which carry no timing.
pub const DEFAULT_FRAME_RATE: f64 = 25.0;

/// File name template with one `%0Nd` (or `%d`) index placeholder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramePattern {
    prefix: String,
    width: usize,
    suffix: String,
}

impl FramePattern {
    pub fn parse(pattern: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("frame pattern {pattern:?} needs one %0Nd placeholder"));
        let start = pattern.find('%').ok_or_else(bad)?;
        let rest = &pattern[start + 1..];
        let end = rest.find('d').ok_or_else(bad)?;
        let spec = &rest[..end];
        let width = if spec.is_empty() {
            0
        } else if spec.starts_with('0') && spec.len() > 1 {
            spec[1..].parse().map_err(|_| bad())?
        } else {
            return Err(bad());
        };
        let suffix = &rest[end + 1..];
        if suffix.contains('%') {
            return Err(bad());
        }
        Ok(FramePattern {
            prefix: pattern[..start].to_string(),
            width,
            suffix: suffix.to_string(),
        })
    }

    pub fn format(&self, index: usize) -> String {
        format!("{}{:0w$}{}", self.prefix, index, self.suffix, w = self.width)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        let digits = name.strip_prefix(&self.prefix)?.strip_suffix(&self.suffix)?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if self.width > 0 && digits.len() < self.width {
            return None;
        }
        digits.parse().ok()
    }
}

/// Indexed files in `dir` matching `pattern`, which must be numbered
/// contiguously from 0.
pub fn list_sequence(dir: &Path, pattern: &FramePattern) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut found = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        if let Some(i) = name.to_str().and_then(|n| pattern.index_of(n)) {
            found.insert(i, entry.path());
        }
    }
    if found.is_empty() {
        return Err(Error::io(
            dir,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("no files matching {}", pattern.format(0)),
            ),
        ));
    }
    for (expected, &i) in found.keys().enumerate() {
        if i != expected {
            return Err(Error::io(
                dir,
                std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("sequence gap: missing {} (frame {expected})", pattern.format(expected)),
                ),
            ));
        }
    }
    Ok(found.into_values().collect())
}

fn decode_png(path: &Path) -> Result<Frame> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = matches!(
        img.color(),
        ColorType::L8 | ColorType::L16 | ColorType::La8 | ColorType::La16
    );
    let frame = if gray {
        Frame::from_bytes(w, h, PixelLayout::Gray, img.to_luma8().as_raw())
    } else {
        Frame::from_bytes(w, h, PixelLayout::Rgb, img.to_rgb8().as_raw())
    };
    frame.map_err(|e| Error::format(path, e.to_string()))
}

/// Read a numbered PNG sequence.
pub fn load_frames(dir: &Path, pattern: &FramePattern) -> Result<FrameSequence> {
    let paths = list_sequence(dir, pattern)?;
    let frames = paths.iter().map(|p| decode_png(p)).collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames, DEFAULT_FRAME_RATE).map_err(|e| Error::format(dir, e.to_string()))
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn encode_png(frame: &Frame) -> Vec<u8> {
    let (w, h) = (frame.width() as u32, frame.height() as u32);
    let (bytes, color) = match frame.layout() {
        PixelLayout::Gray => (frame.to_bytes(), image::ExtendedColorType::L8),
        PixelLayout::Rgb => (frame.to_bytes(), image::ExtendedColorType::Rgb8),
        // PNG stores RGB.
        PixelLayout::Bgr => (frame.swap_red_blue().to_bytes(), image::ExtendedColorType::Rgb8),
    };
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(&bytes, w, h, color)
        .expect("in-memory PNG encoding");
    out
}

/// Write every frame as `pattern`-numbered 8-bit PNG. BGR frames are
/// stored in PNG's RGB order.
pub fn save_frames(video: &FrameSequence, dir: &Path, pattern: &FramePattern) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    video
        .frames()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(pattern.format(i));
            write_atomic(&path, &encode_png(f))?;
            Ok(path)
        })
        .collect()
}
