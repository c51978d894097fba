use super::{FlowField, Frame, ScalarMap};
use crate::error::{Error, Result};

/// Bilinear interpolation of a grid at a real-valued position.
///
/// The position must satisfy `0 <= x <= width - 1` and
/// `0 <= y <= height - 1`; callers clamp or respawn before sampling.
pub trait BilinearSample {
    type Value;

    fn bilinear_sample(&self, x: f64, y: f64) -> Result<Self::Value>;
}

fn check(x: f64, y: f64, width: usize, height: usize) -> Result<()> {
    let inside = x >= 0.0 && y >= 0.0 && x <= (width - 1) as f64 && y <= (height - 1) as f64;
    if inside {
        Ok(())
    } else {
        Err(Error::Domain { x, y, width, height })
    }
}

/// Corner indices and fractional offsets for an in-range position. At the
/// last row/column the upper neighbour collapses onto the lower one.
#[inline]
fn corners(x: f64, y: f64, width: usize, height: usize) -> (usize, usize, usize, usize, f64, f64) {
    let x0 = (x.floor() as usize).min(width - 1);
    let y0 = (y.floor() as usize).min(height - 1);
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    (x0, y0, x1, y1, x - x0 as f64, y - y0 as f64)
}

// Written as nested lerps so that a constant neighbourhood reproduces the
// stored value bit-exactly.
#[inline]
fn lerp2(v00: f64, v10: f64, v01: f64, v11: f64, fx: f64, fy: f64) -> f64 {
    let top = v00 + fx * (v10 - v00);
    let bottom = v01 + fx * (v11 - v01);
    top + fy * (bottom - top)
}

#[inline]
fn sample_with(width: usize, height: usize, x: f64, y: f64, fetch: impl Fn(usize, usize) -> f64) -> f64 {
    let (x0, y0, x1, y1, fx, fy) = corners(x, y, width, height);
    lerp2(fetch(x0, y0), fetch(x1, y0), fetch(x0, y1), fetch(x1, y1), fx, fy)
}

/// Bilinear sample of a single-channel `f64` grid with the position clamped
/// into range first.
#[inline]
pub(crate) fn bilinear_clamped(data: &[f64], width: usize, height: usize, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (width - 1) as f64);
    let y = y.clamp(0.0, (height - 1) as f64);
    sample_with(width, height, x, y, |i, j| data[j * width + i])
}

impl BilinearSample for ScalarMap {
    type Value = f64;

    fn bilinear_sample(&self, x: f64, y: f64) -> Result<f64> {
        check(x, y, self.width, self.height)?;
        Ok(sample_with(self.width, self.height, x, y, |i, j| self.get(i, j)))
    }
}

impl BilinearSample for FlowField {
    type Value = (f64, f64);

    fn bilinear_sample(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        check(x, y, self.width, self.height)?;
        let u = sample_with(self.width, self.height, x, y, |i, j| self.get(i, j).0 as f64);
        let v = sample_with(self.width, self.height, x, y, |i, j| self.get(i, j).1 as f64);
        Ok((u, v))
    }
}

/// Samples the first channel; intended for grayscale frames.
impl BilinearSample for Frame {
    type Value = f64;

    fn bilinear_sample(&self, x: f64, y: f64) -> Result<f64> {
        check(x, y, self.width, self.height)?;
        Ok(sample_with(self.width, self.height, x, y, |i, j| {
            self.get(i, j, 0) as f64
        }))
    }
}
