//! Dense two-frame optical flow by polynomial expansion (Farnebäck 2003)
//! with a coarse-to-fine Gaussian pyramid.
//!
//! At each pyramid level both frames are expanded into local quadratic
//! polynomials. Given a displacement estimate `d`, the second frame's
//! expansion is sampled at `x + d` and the constraint
//! `A d = -1/2 (b2 - b1) + A d_prev` is accumulated over a box window and
//! solved per pixel. The coarsest level starts from zero flow.

mod poly;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{box_filter, gaussian_blur, resize_bilinear, FlowField, Frame, FrameSequence, ScalarMap};

use poly::{expand, Expansion};

/// Regulariser added to the 2x2 determinant; intensities are scaled to
/// `[0, 255]` internally so this matches the usual 8-bit calibration.
const DET_EPS: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowParams {
    pub pyramid_scale: f64,
    pub levels: usize,
    pub window: usize,
    pub iterations: usize,
    pub poly_n: usize,
    pub poly_sigma: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            pyramid_scale: 0.5,
            levels: 3,
            window: 15,
            iterations: 3,
            poly_n: 5,
            poly_sigma: 1.2,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.pyramid_scale > 0.0 && self.pyramid_scale < 1.0) {
            return Err(Error::Parameter(format!(
                "pyramid_scale must lie in (0, 1), got {}",
                self.pyramid_scale
            )));
        }
        if self.levels == 0 || self.iterations == 0 {
            return Err(Error::Parameter("levels and iterations must be >= 1".into()));
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::Parameter(format!("window must be odd, got {}", self.window)));
        }
        if self.poly_n < 3 || self.poly_n.is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "poly_n must be odd and >= 3, got {}",
                self.poly_n
            )));
        }
        if !(self.poly_sigma > 0.0) {
            return Err(Error::Parameter(format!(
                "poly_sigma must be positive, got {}",
                self.poly_sigma
            )));
        }
        Ok(())
    }

    fn level_size(&self, width: usize, height: usize, level: usize) -> (usize, usize) {
        let scale = self.pyramid_scale.powi(level as i32);
        (
            ((width as f64 * scale).round() as usize).max(1),
            ((height as f64 * scale).round() as usize).max(1),
        )
    }
}

fn to_plane(frame: &Frame) -> Vec<f64> {
    frame.to_gray().data().iter().map(|&v| v as f64 * 255.0).collect()
}

/// Estimate the displacement field mapping `prev` onto `next`.
pub fn estimate_flow(prev: &Frame, next: &Frame, params: &FlowParams) -> Result<FlowField> {
    if prev.width() != next.width() || prev.height() != next.height() {
        return Err(Error::Argument(format!(
            "frame sizes differ: {}x{} vs {}x{}",
            prev.width(),
            prev.height(),
            next.width(),
            next.height()
        )));
    }
    params.validate()?;
    estimate_planes(&to_plane(prev), &to_plane(next), prev.width(), prev.height(), params)
}

/// Flow between every pair of consecutive frames: `T - 1` fields for `T`
/// frames. Pairs are processed in parallel.
pub fn estimate_video_flow(video: &FrameSequence, params: &FlowParams) -> Result<Vec<FlowField>> {
    if video.len() < 2 {
        return Err(Error::Argument(format!(
            "flow needs at least 2 frames, got {}",
            video.len()
        )));
    }
    params.validate()?;
    let (w, h) = (video.width(), video.height());
    let planes: Vec<Vec<f64>> = video.frames().par_iter().map(to_plane).collect();
    planes
        .par_windows(2)
        .map(|pair| estimate_planes(&pair[0], &pair[1], w, h, params))
        .collect()
}

fn estimate_planes(prev: &[f64], next: &[f64], width: usize, height: usize, params: &FlowParams) -> Result<FlowField> {
    let (cw, ch) = params.level_size(width, height, params.levels - 1);
    if cw < params.poly_n || ch < params.poly_n {
        return Err(Error::Parameter(format!(
            "coarsest pyramid level is {cw}x{ch}, smaller than poly_n = {}",
            params.poly_n
        )));
    }

    let mut flow_u: Vec<f64> = Vec::new();
    let mut flow_v: Vec<f64> = Vec::new();
    let mut prev_size = (0usize, 0usize);

    for level in (0..params.levels).rev() {
        let (lw, lh) = params.level_size(width, height, level);
        let scale = params.pyramid_scale.powi(level as i32);
        let sigma = (1.0 / scale - 1.0) * 0.5;
        let img0 = resize_bilinear(&gaussian_blur(prev, width, height, sigma), width, height, lw, lh);
        let img1 = resize_bilinear(&gaussian_blur(next, width, height, sigma), width, height, lw, lh);

        if flow_u.is_empty() {
            flow_u = vec![0.0; lw * lh];
            flow_v = vec![0.0; lw * lh];
        } else {
            let (pw, ph) = prev_size;
            let sx = lw as f64 / pw as f64;
            let sy = lh as f64 / ph as f64;
            flow_u = resize_bilinear(&flow_u, pw, ph, lw, lh)
                .into_iter()
                .map(|u| u * sx)
                .collect();
            flow_v = resize_bilinear(&flow_v, pw, ph, lw, lh)
                .into_iter()
                .map(|v| v * sy)
                .collect();
        }
        prev_size = (lw, lh);

        let r0 = expand(&img0, lw, lh, params.poly_n, params.poly_sigma)?;
        let r1 = expand(&img1, lw, lh, params.poly_n, params.poly_sigma)?;
        for _ in 0..params.iterations {
            refine(&r0, &r1, &mut flow_u, &mut flow_v, params.window)?;
        }
    }

    let u = flow_u.into_iter().map(|x| x as f32).collect();
    let v = flow_v.into_iter().map(|x| x as f32).collect();
    FlowField::new(width, height, u, v)
}

/// One displacement update: build the per-pixel normal equations, average
/// them over the window, solve the 2x2 systems.
fn refine(r0: &Expansion, r1: &Expansion, flow_u: &mut [f64], flow_v: &mut [f64], window: usize) -> Result<()> {
    let (w, h) = (r0.width, r0.height);
    let n = w * h;
    let mut g11 = vec![0.0; n];
    let mut g12 = vec![0.0; n];
    let mut g22 = vec![0.0; n];
    let mut h1 = vec![0.0; n];
    let mut h2 = vec![0.0; n];
    let (xmax, ymax) = ((w - 1) as f64, (h - 1) as f64);

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let (du, dv) = (flow_u[i], flow_v[i]);
            let (sx, sy) = (x as f64 + du, y as f64 + dv);
            // Positions leaving the frame contribute nothing.
            if !(sx >= 0.0 && sy >= 0.0 && sx <= xmax && sy <= ymax) {
                continue;
            }
            let c0 = &r0.coeffs[i];
            let c1 = r1.sample(sx, sy);
            let a11 = 0.5 * (c0[2] + c1[2]);
            let a22 = 0.5 * (c0[3] + c1[3]);
            let a12 = 0.25 * (c0[4] + c1[4]);
            let db1 = -0.5 * (c1[0] - c0[0]) + a11 * du + a12 * dv;
            let db2 = -0.5 * (c1[1] - c0[1]) + a12 * du + a22 * dv;
            g11[i] = a11 * a11 + a12 * a12;
            g12[i] = a12 * (a11 + a22);
            g22[i] = a12 * a12 + a22 * a22;
            h1[i] = a11 * db1 + a12 * db2;
            h2[i] = a12 * db1 + a22 * db2;
        }
    }

    let blur = |v: Vec<f64>| -> Result<Vec<f64>> {
        Ok(box_filter(&ScalarMap::from_parts_unchecked(w, h, v), window)?.into_values())
    };
    let (g11, g12, g22, h1, h2) = (blur(g11)?, blur(g12)?, blur(g22)?, blur(h1)?, blur(h2)?);

    for i in 0..n {
        let det = g11[i] * g22[i] - g12[i] * g12[i] + DET_EPS;
        flow_u[i] = (g22[i] * h1[i] - g12[i] * h2[i]) / det;
        flow_v[i] = (g11[i] * h2[i] - g12[i] * h1[i]) / det;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::PixelLayout;

    #[test]
    fn default_params_validate() {
        FlowParams::default().validate().unwrap();
    }

    #[test]
    fn invalid_params_rejected() {
        let bad = [
            FlowParams {
                pyramid_scale: 1.0,
                ..Default::default()
            },
            FlowParams {
                window: 14,
                ..Default::default()
            },
            FlowParams {
                poly_n: 4,
                ..Default::default()
            },
            FlowParams {
                levels: 0,
                ..Default::default()
            },
            FlowParams {
                poly_sigma: 0.0,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(matches!(p.validate(), Err(Error::Parameter(_))), "{p:?}");
        }
    }

    #[test]
    fn mismatched_frames_rejected() {
        let a = Frame::filled(16, 16, PixelLayout::Gray, 0.5).unwrap();
        let b = Frame::filled(16, 12, PixelLayout::Gray, 0.5).unwrap();
        assert!(matches!(
            estimate_flow(&a, &b, &FlowParams::default()),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn tiny_frames_rejected_at_coarsest_level() {
        let a = Frame::filled(12, 12, PixelLayout::Gray, 0.5).unwrap();
        assert!(matches!(
            estimate_flow(&a, &a, &FlowParams::default()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn single_frame_video_rejected() {
        let a = Frame::filled(32, 32, PixelLayout::Gray, 0.5).unwrap();
        let v = FrameSequence::new(vec![a], 25.0).unwrap();
        assert!(matches!(
            estimate_video_flow(&v, &FlowParams::default()),
            Err(Error::Argument(_))
        ));
    }
}
