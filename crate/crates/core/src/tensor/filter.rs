use super::{bilinear_clamped, ScalarMap};
use crate::error::{Error, Result};

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Unweighted `k x k` mean with replicate padding at the borders.
pub fn box_filter(map: &ScalarMap, k: usize) -> Result<ScalarMap> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::Argument(format!(
            "box filter window must be odd and positive, got {k}"
        )));
    }
    if k == 1 {
        return Ok(map.clone());
    }
    let (w, h) = (map.width(), map.height());
    let r = (k / 2) as isize;
    let src = map.values();

    let mut rows = vec![0.0; w * h];
    for y in 0..h {
        let line = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for dx in -r..=r {
                acc += line[clamp_index(x as isize + dx, w)];
            }
            rows[y * w + x] = acc;
        }
    }

    let norm = 1.0 / (k * k) as f64;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -r..=r {
                acc += rows[clamp_index(y as isize + dy, h) * w + x];
            }
            out[y * w + x] = acc * norm;
        }
    }
    Ok(ScalarMap::from_parts_unchecked(w, h, out))
}

/// Percentile with linear interpolation between order statistics:
/// `h = p (n - 1)`, interpolating between `floor(h)` and `ceil(h)`.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Argument("percentile of an empty set".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Argument(format!("percentile fraction {p} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let (a, b) = (sorted[lo], sorted[hi]);
    Ok(a + (h - lo as f64) * (b - a))
}

/// Separable Gaussian blur, replicate padding. `sigma <= 0` is a copy.
pub(crate) fn gaussian_blur(data: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return data.to_vec();
    }
    let radius = ((sigma * 2.5).round() as isize).max(1);
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let mut tmp = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (j, k) in kernel.iter().enumerate() {
                let xx = clamp_index(x as isize + j as isize - radius, width);
                acc += k * data[y * width + xx];
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (j, k) in kernel.iter().enumerate() {
                let yy = clamp_index(y as isize + j as isize - radius, height);
                acc += k * tmp[yy * width + x];
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Bilinear resize with pixel-centre alignment.
pub(crate) fn resize_bilinear(
    data: &[f64],
    width: usize,
    height: usize,
    new_width: usize,
    new_height: usize,
) -> Vec<f64> {
    if new_width == width && new_height == height {
        return data.to_vec();
    }
    let sx = width as f64 / new_width as f64;
    let sy = height as f64 / new_height as f64;
    let mut out = Vec::with_capacity(new_width * new_height);
    for y in 0..new_height {
        let src_y = (y as f64 + 0.5) * sy - 0.5;
        for x in 0..new_width {
            let src_x = (x as f64 + 0.5) * sx - 0.5;
            out.push(bilinear_clamped(data, width, height, src_x, src_y));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_box(map: &ScalarMap, k: usize, x: usize, y: usize) -> f64 {
        let r = (k / 2) as isize;
        let mut acc = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let xx = clamp_index(x as isize + dx, map.width());
                let yy = clamp_index(y as isize + dy, map.height());
                acc += map.get(xx, yy);
            }
        }
        acc / (k * k) as f64
    }

    #[test]
    fn box_filter_constant() {
        let m = ScalarMap::filled(20, 15, 0.4);
        let out = box_filter(&m, 9).unwrap();
        assert!(out.values().iter().all(|v| (v - 0.4).abs() < 1e-14));
    }

    #[test]
    fn box_filter_k1_is_identity() {
        let m = ScalarMap::from_fn(7, 5, |x, y| (x * y) as f64);
        assert_eq!(box_filter(&m, 1).unwrap(), m);
    }

    #[test]
    fn box_filter_rejects_even_window() {
        let m = ScalarMap::filled(4, 4, 0.0);
        assert!(matches!(box_filter(&m, 4), Err(Error::Argument(_))));
        assert!(matches!(box_filter(&m, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn box_filter_checkerboard_interior() {
        let m = ScalarMap::from_fn(30, 30, |x, y| ((x + y) % 2) as f64);
        let out = box_filter(&m, 9).unwrap();
        // Window centred on a 0 cell holds 40 ones; on a 1 cell, 41.
        for (x, y) in [(10, 10), (11, 10), (15, 16)] {
            let want = if (x + y) % 2 == 0 { 40.0 / 81.0 } else { 41.0 / 81.0 };
            assert!((out.get(x, y) - want).abs() < 1e-14);
            assert!((out.get(x, y) - brute_box(&m, 9, x, y)).abs() < 1e-14);
        }
    }

    #[test]
    fn percentile_examples() {
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.5).unwrap(), 3.0);
        assert!((percentile(&[0.0, 10.0], 0.95).unwrap() - 9.5).abs() < 1e-12);
        assert_eq!(percentile(&[7.0], 0.0).unwrap(), 7.0);
        assert_eq!(percentile(&[7.0], 0.73).unwrap(), 7.0);
        assert!(matches!(percentile(&[], 0.5), Err(Error::Argument(_))));
    }

    #[test]
    fn resize_identity_and_constant() {
        let d: Vec<f64> = (0..12).map(|i| i as f64).collect();
        assert_eq!(resize_bilinear(&d, 4, 3, 4, 3), d);
        let c = vec![0.3; 64];
        assert!(resize_bilinear(&c, 8, 8, 3, 5).iter().all(|&v| v == 0.3));
    }

    proptest! {
        #[test]
        fn box_filter_matches_brute_force_and_bounds(
            w in 1usize..12, h in 1usize..12, k in prop::sample::select(vec![1usize, 3, 5, 9]),
            seed in any::<u64>(), shift in -5.0f64..5.0,
        ) {
            let mut s = seed;
            let m = ScalarMap::from_fn(w, h, |_, _| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64
            });
            let out = box_filter(&m, k).unwrap();
            let lo = m.values().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = m.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let shifted = box_filter(&m.map(|v| v + shift), k).unwrap();
            for y in 0..h {
                for x in 0..w {
                    let v = out.get(x, y);
                    prop_assert!((v - brute_box(&m, k, x, y)).abs() < 1e-12);
                    prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
                    prop_assert!((shifted.get(x, y) - (v + shift)).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn percentile_monotone_with_extremes(
            vals in prop::collection::vec(-100.0f64..100.0, 1..40),
            p in 0.0f64..1.0, q in 0.0f64..1.0,
        ) {
            let (a, b) = if p <= q { (p, q) } else { (q, p) };
            prop_assert!(percentile(&vals, a).unwrap() <= percentile(&vals, b).unwrap());
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(percentile(&vals, 0.0).unwrap(), lo);
            prop_assert_eq!(percentile(&vals, 1.0).unwrap(), hi);
        }
    }
}
