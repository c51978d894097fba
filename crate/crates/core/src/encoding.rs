//! HSV rendering of flow fields.
//!
//! Hue carries direction (0° rightward, 90° downward), saturation is fixed,
//! and value carries magnitude normalised by a per-frame reference scale
//! `d_t` that mixes a training-corpus 95th percentile with the current
//! frame's 95th percentile. An optional coherence gate attenuates the value
//! channel before conversion to BGR.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{gate_video, GateParams};
use crate::tensor::{bgr_to_hsv, hsv_to_bgr, percentile, FlowField, Frame, FrameSequence, PixelLayout, ScalarMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalizationConfig {
    /// Mean per-frame 95th-percentile magnitude over the training corpus.
    pub p_train: f64,
    /// Weight of `p_train` against the current frame's percentile.
    pub mix_weight: f64,
    /// Offset subtracted before normalisation, as a fraction of `d_t`.
    pub offset_fraction: f64,
    pub saturation: f64,
    /// Lower bound on `d_t` for static frames.
    pub eps_scale: f64,
    /// Frame rate recorded on encoded videos.
    pub frame_rate: f64,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            p_train: 1.0,
            mix_weight: 0.5,
            offset_fraction: 0.03,
            saturation: 1.0,
            eps_scale: 1e-3,
            frame_rate: 25.0,
        }
    }
}

impl NormalizationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_train >= 0.0) || !self.p_train.is_finite() {
            return Err(Error::Parameter(format!("p_train must be >= 0, got {}", self.p_train)));
        }
        if !(0.0..=1.0).contains(&self.mix_weight) {
            return Err(Error::Parameter(format!(
                "mix_weight must lie in [0, 1], got {}",
                self.mix_weight
            )));
        }
        if !(0.0..1.0).contains(&self.offset_fraction) {
            return Err(Error::Parameter(format!(
                "offset_fraction must lie in [0, 1), got {}",
                self.offset_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.saturation) {
            return Err(Error::Parameter(format!(
                "saturation must lie in [0, 1], got {}",
                self.saturation
            )));
        }
        if !(self.eps_scale > 0.0) {
            return Err(Error::Parameter("eps_scale must be positive".into()));
        }
        Ok(())
    }
}

/// 95th percentile of the flow magnitude over all pixels.
pub fn frame_p95(flow: &FlowField) -> f64 {
    // A FlowField always has at least one pixel.
    percentile(flow.magnitude().values(), 0.95).unwrap_or(0.0)
}

/// `d_t = w p_train + (1 - w) frame_p95`, floored at `eps_scale`.
pub fn compute_reference_scale(config: &NormalizationConfig, frame_p95: f64) -> f64 {
    let d = config.mix_weight * config.p_train + (1.0 - config.mix_weight) * frame_p95;
    d.max(config.eps_scale)
}

pub fn reference_scales(flows: &[FlowField], config: &NormalizationConfig) -> Vec<f64> {
    flows
        .par_iter()
        .map(|f| compute_reference_scale(config, frame_p95(f)))
        .collect()
}

/// `V0 = clamp((m - offset d_t) / d_t, 0, 1)`, evaluated as `m / d_t - offset`.
pub fn pre_gate_value(magnitude: &ScalarMap, d_t: f64, offset_fraction: f64) -> ScalarMap {
    magnitude.map(|m| (m / d_t - offset_fraction).clamp(0.0, 1.0))
}

/// Flow direction in degrees `[0, 360)`, clockwise on screen (y down).
/// Zero vectors map to 0.
pub fn flow_to_hue(flow: &FlowField) -> ScalarMap {
    let values = flow
        .u()
        .iter()
        .zip(flow.v())
        .map(|(&u, &v)| hue_of(u as f64, v as f64))
        .collect();
    ScalarMap::new(flow.width(), flow.height(), values).expect("flow has positive area")
}

#[inline]
fn hue_of(u: f64, v: f64) -> f64 {
    if u == 0.0 && v == 0.0 {
        return 0.0;
    }
    let h = v.atan2(u).to_degrees().rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative angles.
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

/// 8-bit hue storage: `round(h / 2)` wrapped into `[0, 179]`.
pub fn hue_to_byte(h: f64) -> u8 {
    ((h.rem_euclid(360.0) / 2.0).round() as u32 % 180) as u8
}

pub fn byte_to_hue(b: u8) -> f64 {
    b as f64 * 2.0
}

/// Encode one flow field to a BGR frame. `mask`, when given, multiplies the
/// value channel before the final clamp.
pub fn encode_hsv_frame(
    flow: &FlowField,
    d_t: f64,
    config: &NormalizationConfig,
    mask: Option<&ScalarMap>,
) -> Result<Frame> {
    if let Some(m) = mask {
        if m.width() != flow.width() || m.height() != flow.height() {
            return Err(Error::Argument("gate mask and flow differ in size".into()));
        }
    }
    let value = pre_gate_value(&flow.magnitude(), d_t, config.offset_fraction);
    let (w, h) = (flow.width(), flow.height());
    let mut data = Vec::with_capacity(w * h * 3);
    for i in 0..w * h {
        let hue = hue_of(flow.u()[i] as f64, flow.v()[i] as f64);
        let mut v = value.values()[i];
        if let Some(m) = mask {
            v = (v * m.values()[i]).clamp(0.0, 1.0);
        }
        let bgr = hsv_to_bgr(hue, config.saturation, v);
        data.extend(bgr.iter().map(|&c| c as f32));
    }
    Frame::new(w, h, PixelLayout::Bgr, data)
}

/// Encode a flow sequence to a BGR motion video with one frame per field.
/// With `gate`, the value channel is attenuated by the smoothed coherence
/// mask computed with the same reference scales.
pub fn encode_hsv_video(
    flows: &[FlowField],
    config: &NormalizationConfig,
    gate: Option<&GateParams>,
) -> Result<FrameSequence> {
    config.validate()?;
    let first = flows
        .first()
        .ok_or_else(|| Error::Argument("no flow fields to encode".into()))?;
    if flows.iter().any(|f| !f.same_size(first)) {
        return Err(Error::Argument("flow fields differ in size".into()));
    }
    let d_ts = reference_scales(flows, config);
    let masks = match gate {
        Some(p) => Some(gate_video(flows, &d_ts, p)?),
        None => None,
    };
    let frames = flows
        .par_iter()
        .enumerate()
        .map(|(i, f)| encode_hsv_frame(f, d_ts[i], config, masks.as_ref().map(|m| &m[i])))
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames, config.frame_rate)
}

/// Approximate inverse of [`encode_hsv_frame`] without a gate: direction
/// from hue and magnitude from value. Pixels at value 0 decode to zero.
pub fn decode_hsv_frame(frame: &Frame, d_t: f64, offset_fraction: f64) -> Result<FlowField> {
    let (bi, ri) = match frame.layout() {
        PixelLayout::Bgr => (0, 2),
        PixelLayout::Rgb => (2, 0),
        PixelLayout::Gray => return Err(Error::Argument("motion encoding needs a colour frame".into())),
    };
    let (w, h) = (frame.width(), frame.height());
    let mut u = Vec::with_capacity(w * h);
    let mut v = Vec::with_capacity(w * h);
    for px in frame.data().chunks_exact(3) {
        let (hue, _, val) = bgr_to_hsv(px[bi] as f64, px[1] as f64, px[ri] as f64);
        let m = if val > 0.0 { (val + offset_fraction) * d_t } else { 0.0 };
        let a = hue.to_radians();
        u.push((m * a.cos()) as f32);
        v.push((m * a.sin()) as f32);
    }
    FlowField::new(w, h, u, v)
}

/// Mirror an encoded motion video left-right and remap hue
/// `h -> (180 - h) mod 360` so colours keep encoding the reflected motion.
pub fn flip_horizontal_with_hue_remap(encoded: &FrameSequence) -> Result<FrameSequence> {
    let layout = encoded.layout();
    let (bi, ri) = match layout {
        PixelLayout::Bgr => (0, 2),
        PixelLayout::Rgb => (2, 0),
        PixelLayout::Gray => return Err(Error::Argument("motion encoding needs a colour frame".into())),
    };
    let (w, h) = (encoded.width(), encoded.height());
    let frames = encoded
        .frames()
        .par_iter()
        .map(|frame| {
            let mut data = vec![0.0f32; w * h * 3];
            for y in 0..h {
                for x in 0..w {
                    let src = (y * w + (w - 1 - x)) * 3;
                    let px = &frame.data()[src..src + 3];
                    let (hue, s, v) = bgr_to_hsv(px[bi] as f64, px[1] as f64, px[ri] as f64);
                    let bgr = hsv_to_bgr((180.0 - hue).rem_euclid(360.0), s, v);
                    let dst = (y * w + x) * 3;
                    data[dst + bi] = bgr[0] as f32;
                    data[dst + 1] = bgr[1] as f32;
                    data[dst + ri] = bgr[2] as f32;
                }
            }
            Frame::new(w, h, layout, data)
        })
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames, encoded.frame_rate())
}
