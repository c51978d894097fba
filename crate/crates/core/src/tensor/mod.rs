//! Value types shared by every stage plus the primitive grid operations
//! (bilinear sampling, box filtering, percentiles, color conversion).
//!
//! Frames hold intensities in `[0, 1]` as `f32`; scalar maps derived from
//! flow (magnitude, coherence, gate weights) are `f64` so that products of
//! small factors keep their precision. Quantisation to 8 bits happens only
//! in [`crate::pipeline`] when files are written.

mod color;
mod filter;
mod sample;

pub use color::{bgr_to_hsv, hsv_to_bgr, rgb_to_gray};
pub use filter::{box_filter, percentile};
pub(crate) use filter::{gaussian_blur, resize_bilinear};
pub(crate) use sample::bilinear_clamped;
pub use sample::BilinearSample;

use crate::error::{Error, Result};

/// Channel layout of a frame. Colour frames produced by the motion encoder
/// are BGR; frames decoded from PNG are RGB.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PixelLayout {
    Gray,
    Rgb,
    Bgr,
}

impl PixelLayout {
    pub fn channels(self) -> usize {
        match self {
            PixelLayout::Gray => 1,
            PixelLayout::Rgb | PixelLayout::Bgr => 3,
        }
    }
}

/// One image, channels interleaved row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    layout: PixelLayout,
    data: Vec<f32>,
}

impl Frame {
    pub fn new(width: usize, height: usize, layout: PixelLayout, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Argument(format!(
                "frame must have positive area, got {width}x{height}"
            )));
        }
        let expected = width * height * layout.channels();
        if data.len() != expected {
            return Err(Error::Argument(format!(
                "frame data has {} values, expected {expected}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Argument(format!("frame intensity {bad} outside [0, 1]")));
        }
        Ok(Frame {
            width,
            height,
            layout,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, layout: PixelLayout, value: f32) -> Result<Self> {
        Frame::new(width, height, layout, vec![value; width * height * layout.channels()])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn layout(&self) -> PixelLayout {
        self.layout
    }

    pub fn channels(&self) -> usize {
        self.layout.channels()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.layout.channels() + c]
    }

    /// Single-channel view of the frame, converting colour by Rec.601 luma.
    pub fn to_gray(&self) -> Frame {
        match self.layout {
            PixelLayout::Gray => self.clone(),
            _ => rgb_to_gray(self),
        }
    }

    /// 8-bit quantisation, `round(255 v)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn from_bytes(width: usize, height: usize, layout: PixelLayout, bytes: &[u8]) -> Result<Self> {
        Frame::new(width, height, layout, bytes.iter().map(|&b| b as f32 / 255.0).collect())
    }

    /// Same pixels relabelled with the opposite colour order.
    pub fn swap_red_blue(&self) -> Frame {
        let layout = match self.layout {
            PixelLayout::Gray => return self.clone(),
            PixelLayout::Rgb => PixelLayout::Bgr,
            PixelLayout::Bgr => PixelLayout::Rgb,
        };
        let mut data = self.data.clone();
        for px in data.chunks_exact_mut(3) {
            px.swap(0, 2);
        }
        Frame {
            width: self.width,
            height: self.height,
            layout,
            data,
        }
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, layout: PixelLayout, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height * layout.channels());
        Frame {
            width,
            height,
            layout,
            data,
        }
    }
}

/// Ordered frames of identical size and layout.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    frame_rate: f64,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, frame_rate: f64) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Argument("frame sequence is empty".into()))?;
        let (w, h, layout) = (first.width, first.height, first.layout);
        for (i, f) in frames.iter().enumerate() {
            if f.width != w || f.height != h || f.layout != layout {
                return Err(Error::Argument(format!(
                    "frame {i} is {}x{} {:?}, expected {w}x{h} {layout:?}",
                    f.width, f.height, f.layout
                )));
            }
        }
        Ok(FrameSequence { frames, frame_rate })
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }

    pub fn layout(&self) -> PixelLayout {
        self.frames[0].layout
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }
}

/// Dense displacement field in pixels/frame; `u` positive rightward,
/// `v` positive downward.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f32>,
    v: Vec<f32>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, u: Vec<f32>, v: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Argument(format!(
                "flow must have positive area, got {width}x{height}"
            )));
        }
        let n = width * height;
        if u.len() != n || v.len() != n {
            return Err(Error::Argument(format!(
                "flow components have {} and {} values, expected {n}",
                u.len(),
                v.len()
            )));
        }
        if u.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Argument("flow contains non-finite values".into()));
        }
        Ok(FlowField { width, height, u, v })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        FlowField::uniform(width, height, 0.0, 0.0)
    }

    pub fn uniform(width: usize, height: usize, u: f32, v: f32) -> Self {
        FlowField {
            width,
            height,
            u: vec![u; width * height],
            v: vec![v; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> (f32, f32)) -> Self {
        let mut u = Vec::with_capacity(width * height);
        let mut v = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let (a, b) = f(x, y);
                u.push(a);
                v.push(b);
            }
        }
        FlowField { width, height, u, v }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn u(&self) -> &[f32] {
        &self.u
    }

    pub fn v(&self) -> &[f32] {
        &self.v
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (f32, f32) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    pub fn same_size(&self, other: &FlowField) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Per-pixel Euclidean norm.
    pub fn magnitude(&self) -> ScalarMap {
        let values = self
            .u
            .iter()
            .zip(&self.v)
            .map(|(&u, &v)| (u as f64).hypot(v as f64))
            .collect();
        ScalarMap::from_parts_unchecked(self.width, self.height, values)
    }

    /// Mirror left-right and negate the horizontal component: the flow of
    /// the horizontally reflected video.
    pub fn mirrored_horizontal(&self) -> FlowField {
        FlowField::from_fn(self.width, self.height, |x, y| {
            let (u, v) = self.get(self.width - 1 - x, y);
            (-u, v)
        })
    }
}

/// Per-pixel real values (magnitude, coherence, gate weights, ...).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Argument(format!(
                "map must have positive area, got {width}x{height}"
            )));
        }
        if values.len() != width * height {
            return Err(Error::Argument(format!(
                "map has {} values, expected {}",
                values.len(),
                width * height
            )));
        }
        Ok(ScalarMap { width, height, values })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        ScalarMap {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        ScalarMap { width, height, values }
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        ScalarMap { width, height, values }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn same_size(&self, other: &ScalarMap) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Elementwise map producing a new map of the same size.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarMap {
        ScalarMap::from_parts_unchecked(self.width, self.height, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Flow vectors divided by their (damped) length.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVectorField {
    pub nx: ScalarMap,
    pub ny: ScalarMap,
}

impl UnitVectorField {
    pub fn width(&self) -> usize {
        self.nx.width()
    }

    pub fn height(&self) -> usize {
        self.nx.height()
    }
}
