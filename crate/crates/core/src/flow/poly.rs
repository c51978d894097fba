//! Quadratic polynomial expansion of an image under a Gaussian
//! applicability window.
//!
//! Every pixel neighbourhood is approximated in the weighted least-squares
//! sense by `f(p) ~ p^T A p + b^T p + c`. The normal equations have a
//! constant 6x6 matrix, so the fit reduces to six separable correlations
//! followed by a fixed linear map.

use nalgebra::SMatrix;

use crate::error::{Error, Result};

/// Per-pixel expansion coefficients `[b_x, b_y, a_xx, a_yy, a_xy]` where
/// `A = [[a_xx, a_xy/2], [a_xy/2, a_yy]]`.
pub(crate) struct Expansion {
    pub width: usize,
    pub height: usize,
    pub coeffs: Vec<[f64; 5]>,
}

impl Expansion {
    /// Bilinear sample of all coefficients at an in-range position.
    #[inline]
    pub fn sample(&self, x: f64, y: f64) -> [f64; 5] {
        let (w, h) = (self.width, self.height);
        let x0 = (x.floor() as usize).min(w - 1);
        let y0 = (y.floor() as usize).min(h - 1);
        let x1 = (x0 + 1).min(w - 1);
        let y1 = (y0 + 1).min(h - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let c00 = &self.coeffs[y0 * w + x0];
        let c10 = &self.coeffs[y0 * w + x1];
        let c01 = &self.coeffs[y1 * w + x0];
        let c11 = &self.coeffs[y1 * w + x1];
        let mut out = [0.0; 5];
        for i in 0..5 {
            let top = c00[i] + fx * (c10[i] - c00[i]);
            let bottom = c01[i] + fx * (c11[i] - c01[i]);
            out[i] = top + fy * (bottom - top);
        }
        out
    }
}

/// Coefficient extraction matrix: rows of `G^-1` for the five non-constant
/// basis functions, basis order `[1, x, y, x^2, y^2, xy]`.
fn solve_matrix(radius: isize, weights: &[f64]) -> Result<[[f64; 6]; 5]> {
    let mut g = SMatrix::<f64, 6, 6>::zeros();
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let a = weights[(dx + radius) as usize] * weights[(dy + radius) as usize];
            let (x, y) = (dx as f64, dy as f64);
            let basis = [1.0, x, y, x * x, y * y, x * y];
            for i in 0..6 {
                for j in 0..6 {
                    g[(i, j)] += a * basis[i] * basis[j];
                }
            }
        }
    }
    let inv = g
        .try_inverse()
        .ok_or_else(|| Error::Parameter("polynomial expansion matrix is singular".into()))?;
    let mut rows = [[0.0; 6]; 5];
    for (r, row) in rows.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = inv[(r + 1, c)];
        }
    }
    Ok(rows)
}

pub(crate) fn expand(img: &[f64], width: usize, height: usize, poly_n: usize, sigma: f64) -> Result<Expansion> {
    let radius = (poly_n / 2) as isize;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let solve = solve_matrix(radius, &weights)?;

    // Horizontal pass: kernels g(d), g(d) d, g(d) d^2.
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut h0 = vec![0.0; width * height];
    let mut h1 = vec![0.0; width * height];
    let mut h2 = vec![0.0; width * height];
    for y in 0..height {
        let row = &img[y * width..(y + 1) * width];
        for x in 0..width {
            let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
            for d in -radius..=radius {
                let v = row[clamp(x as isize + d, width)] * weights[(d + radius) as usize];
                let df = d as f64;
                s0 += v;
                s1 += v * df;
                s2 += v * df * df;
            }
            let i = y * width + x;
            h0[i] = s0;
            h1[i] = s1;
            h2[i] = s2;
        }
    }

    let mut coeffs = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            // Moments m_pq = sum g(dx) g(dy) dx^p dy^q I.
            let (mut m00, mut m10, mut m01, mut m20, mut m02, mut m11) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for d in -radius..=radius {
                let j = clamp(y as isize + d, height) * width + x;
                let w = weights[(d + radius) as usize];
                let df = d as f64;
                m00 += w * h0[j];
                m10 += w * h1[j];
                m20 += w * h2[j];
                m01 += w * df * h0[j];
                m11 += w * df * h1[j];
                m02 += w * df * df * h0[j];
            }
            let moments = [m00, m10, m01, m20, m02, m11];
            let mut c = [0.0; 5];
            for (k, row) in solve.iter().enumerate() {
                c[k] = row.iter().zip(&moments).map(|(a, b)| a * b).sum();
            }
            coeffs.push(c);
        }
    }
    Ok(Expansion { width, height, coeffs })
}
