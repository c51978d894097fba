//! Appearance-free stimulus synthesis.
//!
//! Two generators consume a source video's flow sequence:
//!
//! * dense noise: an i.i.d. uniform noise image is backward-warped through
//!   time, `I_{t+1}(x) = I_t(x - f_t(x))`, with fresh noise wherever the
//!   source position leaves the frame;
//! * random dots: a fixed-size population of finite-lifetime dots is
//!   advected by bilinearly sampled flow and rendered on black. Dots whose
//!   lifetime expires or that leave the frame respawn uniformly at random.
//!
//! All randomness comes from an explicitly seeded ChaCha8 stream so the
//! output is identical across platforms and runs.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{BilinearSample, FlowField, Frame, FrameSequence, PixelLayout};

/// Seeded generator shared by both stimulus types.
#[derive(Clone, Debug)]
pub struct StimulusRng(ChaCha8Rng);

impl StimulusRng {
    pub fn new(seed: u64) -> Self {
        StimulusRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: u32) -> u32 {
        (((self.0.next_u64() >> 32) * n as u64) >> 32) as u32
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DotParams {
    pub count: usize,
    pub lifetime: u32,
    /// Rendered disc radius in pixels; 0 draws a single pixel.
    pub radius: f64,
    pub seed: u64,
}

impl Default for DotParams {
    fn default() -> Self {
        DotParams {
            count: 500,
            lifetime: 8,
            radius: 0.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DotPopulation {
    width: usize,
    height: usize,
    lifetime: u32,
    positions: Vec<(f64, f64)>,
    ages: Vec<u32>,
    rng: StimulusRng,
}

impl DotPopulation {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn ages(&self) -> &[u32] {
        &self.ages
    }

    pub fn lifetime(&self) -> u32 {
        self.lifetime
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn random_position(&mut self) -> (f64, f64) {
        let x = self.rng.uniform() * (self.width - 1) as f64;
        let y = self.rng.uniform() * (self.height - 1) as f64;
        (x, y)
    }

    /// Test hook: place a dot at an explicit state.
    #[doc(hidden)]
    pub fn set_dot(&mut self, i: usize, pos: (f64, f64), age: u32) {
        self.positions[i] = pos;
        self.ages[i] = age;
    }
}

/// Uniform positions over the frame and uniform ages over `0..lifetime`.
pub fn init_dots(width: usize, height: usize, count: usize, lifetime: u32, seed: u64) -> Result<DotPopulation> {
    if width == 0 || height == 0 {
        return Err(Error::Argument(format!("zero-area frame {width}x{height}")));
    }
    if lifetime == 0 {
        return Err(Error::Argument("dot lifetime must be >= 1".into()));
    }
    let mut pop = DotPopulation {
        width,
        height,
        lifetime,
        positions: Vec::with_capacity(count),
        ages: Vec::with_capacity(count),
        rng: StimulusRng::new(seed),
    };
    for _ in 0..count {
        let p = pop.random_position();
        let age = pop.rng.below(lifetime);
        pop.positions.push(p);
        pop.ages.push(age);
    }
    Ok(pop)
}

/// Move every dot by the flow sampled at its position; respawn dots that
/// expire or leave the frame.
pub fn advance_dots(pop: &mut DotPopulation, flow: &FlowField) -> Result<()> {
    if flow.width() != pop.width || flow.height() != pop.height {
        return Err(Error::Argument(format!(
            "flow is {}x{}, dots live on {}x{}",
            flow.width(),
            flow.height(),
            pop.width,
            pop.height
        )));
    }
    let (xmax, ymax) = ((pop.width - 1) as f64, (pop.height - 1) as f64);
    for i in 0..pop.positions.len() {
        let (x, y) = pop.positions[i];
        let (u, v) = flow.bilinear_sample(x, y)?;
        let (nx, ny) = (x + u, y + v);
        let age = pop.ages[i] + 1;
        let inside = nx >= 0.0 && ny >= 0.0 && nx <= xmax && ny <= ymax;
        if age >= pop.lifetime || !inside {
            pop.positions[i] = pop.random_position();
            pop.ages[i] = 0;
        } else {
            pop.positions[i] = (nx, ny);
            pop.ages[i] = age;
        }
    }
    Ok(())
}

/// White dots on black, positions rounded to the nearest pixel. Overlaps
/// saturate at 1.
pub fn render_dots(pop: &DotPopulation, radius: f64) -> Frame {
    let (w, h) = (pop.width, pop.height);
    let mut data = vec![0.0f32; w * h];
    let reach = radius.max(0.0).floor() as isize;
    let r2 = radius * radius;
    for &(x, y) in &pop.positions {
        let (cx, cy) = (x.round() as isize, y.round() as isize);
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                if (dx * dx + dy * dy) as f64 > r2 {
                    continue;
                }
                let (px, py) = (cx + dx, cy + dy);
                if px >= 0 && py >= 0 && (px as usize) < w && (py as usize) < h {
                    data[py as usize * w + px as usize] = 1.0;
                }
            }
        }
    }
    Frame::new(w, h, PixelLayout::Gray, data).expect("dot frame has positive area")
}

fn check_flows(flows: &[FlowField]) -> Result<&FlowField> {
    let first = flows
        .first()
        .ok_or_else(|| Error::Argument("at least one flow field is required".into()))?;
    if flows.iter().any(|f| !f.same_size(first)) {
        return Err(Error::Argument("flow fields differ in size".into()));
    }
    Ok(first)
}

/// Random-dot video with `flows.len() + 1` frames.
pub fn synthesize_dot_video(flows: &[FlowField], params: &DotParams, frame_rate: f64) -> Result<FrameSequence> {
    let first = check_flows(flows)?;
    let mut pop = init_dots(
        first.width(),
        first.height(),
        params.count,
        params.lifetime,
        params.seed,
    )?;
    let mut frames = Vec::with_capacity(flows.len() + 1);
    frames.push(render_dots(&pop, params.radius));
    for flow in flows {
        advance_dots(&mut pop, flow)?;
        frames.push(render_dots(&pop, params.radius));
    }
    FrameSequence::new(frames, frame_rate)
}

/// Dense-noise video with `flows.len() + 1` frames.
pub fn synthesize_noise_video(flows: &[FlowField], seed: u64, frame_rate: f64) -> Result<FrameSequence> {
    let first = check_flows(flows)?;
    let (w, h) = (first.width(), first.height());
    let mut rng = StimulusRng::new(seed);
    let canvas: Vec<f32> = (0..w * h).map(|_| rng.uniform() as f32).collect();
    let mut current = Frame::new(w, h, PixelLayout::Gray, canvas)?;
    let mut frames = Vec::with_capacity(flows.len() + 1);
    let (xmax, ymax) = ((w - 1) as f64, (h - 1) as f64);
    for flow in flows {
        let mut next = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let (u, v) = flow.get(x, y);
                let (sx, sy) = (x as f64 - u as f64, y as f64 - v as f64);
                let value = if sx >= 0.0 && sy >= 0.0 && sx <= xmax && sy <= ymax {
                    current.bilinear_sample(sx, sy)? as f32
                } else {
                    rng.uniform() as f32
                };
                next.push(value);
            }
        }
        let warped = Frame::new(w, h, PixelLayout::Gray, next)?;
        frames.push(std::mem::replace(&mut current, warped));
    }
    frames.push(current);
    FrameSequence::new(frames, frame_rate)
}
