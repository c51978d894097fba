use super::{Frame, PixelLayout};

/// Hexcone HSV to colour, channels returned in B, G, R order.
///
/// `h` in degrees (wrapped into `[0, 360)`), `s` and `v` in `[0, 1]`.
pub fn hsv_to_bgr(h: f64, s: f64, v: f64) -> [f64; 3] {
    let s = s.clamp(0.0, 1.0);
    let v = v.clamp(0.0, 1.0);
    let h = h.rem_euclid(360.0);
    let chroma = v * s;
    let sector = h / 60.0;
    let x = chroma * (1.0 - ((sector % 2.0) - 1.0).abs());
    let m = v - chroma;
    let (r, g, b) = match sector as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    [
        (b + m).clamp(0.0, 1.0),
        (g + m).clamp(0.0, 1.0),
        (r + m).clamp(0.0, 1.0),
    ]
}

/// Inverse of [`hsv_to_bgr`]: returns `(h, s, v)` with `h` in `[0, 360)`.
/// Achromatic inputs report hue 0.
pub fn bgr_to_hsv(b: f64, g: f64, r: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    if max <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = delta / max;
    if delta <= 0.0 {
        return (0.0, s, max);
    }
    let h = if max == r {
        60.0 * ((g - b) / delta)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    (h.rem_euclid(360.0), s, max)
}

/// Rec.601 luma of an RGB or BGR frame.
pub fn rgb_to_gray(frame: &Frame) -> Frame {
    let (ri, bi) = match frame.layout() {
        PixelLayout::Gray => return frame.clone(),
        PixelLayout::Rgb => (0, 2),
        PixelLayout::Bgr => (2, 0),
    };
    let data = frame
        .data()
        .chunks_exact(3)
        .map(|px| {
            let y = 0.299 * px[ri] as f64 + 0.587 * px[1] as f64 + 0.114 * px[bi] as f64;
            y.clamp(0.0, 1.0) as f32
        })
        .collect();
    Frame::from_parts_unchecked(frame.width(), frame.height(), PixelLayout::Gray, data)
}
