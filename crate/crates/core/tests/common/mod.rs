#![allow(dead_code)]

use afv_core::tensor::{FlowField, Frame, PixelLayout};

/// Small deterministic generator for test fixtures, independent of the
/// library's stimulus RNG.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Band-limited periodic texture: a sum of cosines whose wave numbers are
/// integers over the frame size, so translating by any real offset with
/// wraparound is exact analytically.
pub struct PeriodicTexture {
    size: usize,
    waves: Vec<(f64, f64, f64, f64)>,
}

impl PeriodicTexture {
    pub fn new(size: usize, seed: u64) -> Self {
        let mut rng = Lcg(seed);
        let mut waves = Vec::new();
        while waves.len() < 48 {
            let kx = (rng.next_f64() * 25.0).floor() - 12.0;
            let ky = (rng.next_f64() * 25.0).floor() - 12.0;
            let k = kx.hypot(ky);
            if !(2.0..=12.0).contains(&k) {
                continue;
            }
            let amp = 1.0 / k;
            let phase = rng.next_f64() * std::f64::consts::TAU;
            waves.push((kx, ky, amp, phase));
        }
        let total: f64 = waves.iter().map(|w| w.2).sum();
        for w in &mut waves {
            w.2 /= total;
        }
        PeriodicTexture { size, waves }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let n = self.size as f64;
        let s: f64 = self
            .waves
            .iter()
            .map(|&(kx, ky, a, p)| a * (std::f64::consts::TAU * (kx * x + ky * y) / n + p).cos())
            .sum();
        (0.5 + 0.5 * s).clamp(0.0, 1.0)
    }

    /// Frame of the texture shifted by `(tx, ty)`: `I(x) = T(x - t)`.
    pub fn frame(&self, tx: f64, ty: f64) -> Frame {
        let n = self.size;
        let data = (0..n * n)
            .map(|i| self.value((i % n) as f64 - tx, (i / n) as f64 - ty) as f32)
            .collect();
        Frame::new(n, n, PixelLayout::Gray, data).unwrap()
    }
}

/// Mean endpoint error against a constant vector over pixels at least
/// `margin` from every border.
pub fn interior_epe(flow: &FlowField, truth: (f64, f64), margin: usize) -> f64 {
    let (w, h) = (flow.width(), flow.height());
    let mut acc = 0.0;
    let mut n = 0usize;
    for y in margin..h - margin {
        for x in margin..w - margin {
            let (u, v) = flow.get(x, y);
            acc += (u as f64 - truth.0).hypot(v as f64 - truth.1);
            n += 1;
        }
    }
    acc / n as f64
}

pub fn mean_magnitude(flow: &FlowField) -> f64 {
    let m = flow.magnitude();
    m.values().iter().sum::<f64>() / m.values().len() as f64
}

pub fn random_flow(width: usize, height: usize, scale: f64, rng: &mut Lcg) -> FlowField {
    FlowField::from_fn(width, height, |_, _| {
        let u = (rng.next_f64() * 2.0 - 1.0) * scale;
        let v = (rng.next_f64() * 2.0 - 1.0) * scale;
        (u as f32, v as f32)
    })
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Expected statistics written by `tests/fixtures/gen_fixtures.py`.
pub fn expected() -> std::collections::HashMap<String, f64> {
    let text = std::fs::read_to_string(fixture("expected.kv")).unwrap();
    afv_core::pipeline::parse_kv(&text)
        .into_iter()
        .map(|(k, v)| (k, v.parse().unwrap()))
        .collect()
}

pub fn ttest_vectors() -> std::collections::HashMap<String, Vec<f64>> {
    let text = std::fs::read_to_string(fixture("ttest_vectors.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let (name, vals) = l.split_once(',').unwrap();
            (
                name.to_string(),
                vals.split_whitespace().map(|v| v.parse().unwrap()).collect(),
            )
        })
        .collect()
}

/// Per-pixel transcription of the coherence gate, written directly from the
/// definitions with no shared code: damped unit vectors, a `k x k` mean with
/// edge replication, resultant length, soft threshold, hard magnitude floor,
/// product, and the exponential moving average seeded by the first frame.
pub fn gate_oracle(flows: &[FlowField], d_ts: &[f64], p: &afv_core::gate::GateParams) -> Vec<Vec<f64>> {
    let (w, h) = (flows[0].width(), flows[0].height());
    let r = (p.window / 2) as isize;
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (t, f) in flows.iter().enumerate() {
        let d = d_ts[t];
        let unit = |x: usize, y: usize| {
            let (u, v) = f.get(x, y);
            let (u, v) = (u as f64, v as f64);
            let n = (u * u + v * v).sqrt() + p.epsilon;
            (u / n, v / n)
        };
        let mut g = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let (mut sx, mut sy) = (0.0, 0.0);
                for dy in -r..=r {
                    for dx in -r..=r {
                        let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                        let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                        let (a, b) = unit(xx, yy);
                        sx += a;
                        sy += b;
                    }
                }
                let area = (p.window * p.window) as f64;
                let c = ((sx / area).powi(2) + (sy / area).powi(2)).sqrt().min(1.0);
                let wc = ((c - p.tau) / (1.0 - p.tau)).clamp(0.0, 1.0);
                let (u, v) = f.get(x, y);
                let m = ((u as f64).powi(2) + (v as f64).powi(2)).sqrt();
                let q = if m < p.r_min * d { 0.0 } else { (m / d).min(1.0) };
                let gi = if p.beta == 0.0 { q } else { q * wc.powf(p.beta) };
                g[y * w + x] = match out.last() {
                    None => gi,
                    Some(prev) => p.lambda * prev[y * w + x] + (1.0 - p.lambda) * gi,
                };
            }
        }
        out.push(g);
    }
    out
}

/// Random flow video mixing coherent patches and noise so every branch of
/// the gate is exercised.
pub fn random_gate_video(w: usize, h: usize, frames: usize, seed: u64) -> Vec<FlowField> {
    let mut rng = Lcg(seed);
    (0..frames)
        .map(|_| {
            let (cu, cv) = (rng.next_f64() * 6.0 - 3.0, rng.next_f64() * 6.0 - 3.0);
            let split = (rng.next_f64() * w as f64) as usize;
            let mut vals = Vec::with_capacity(w * h);
            for _ in 0..w * h {
                vals.push((rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0, rng.next_f64()));
            }
            FlowField::from_fn(w, h, |x, y| {
                let (a, b, s) = vals[y * w + x];
                if s < 0.05 {
                    (0.0, 0.0)
                } else if x < split {
                    ((cu + 0.3 * a) as f32, (cv + 0.3 * b) as f32)
                } else {
                    ((4.0 * a) as f32, (4.0 * b) as f32)
                }
            })
        })
        .collect()
}
