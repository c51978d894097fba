//! Common-fate coherence gate.
//!
//! Flow vectors are normalised to (damped) unit length, averaged over a
//! `k x k` box, and the length of the resultant measures how consistently
//! the neighbourhood moves. The gate is the product of a hard-thresholded
//! magnitude weight and a soft-thresholded coherence weight raised to `beta`,
//! smoothed over time with an exponential moving average.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{box_filter, FlowField, ScalarMap, UnitVectorField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateParams {
    pub epsilon: f64,
    pub window: usize,
    pub tau: f64,
    pub r_min: f64,
    pub beta: f64,
    pub lambda: f64,
}

impl Default for GateParams {
    fn default() -> Self {
        GateParams {
            epsilon: 1e-6,
            window: 9,
            tau: 0.30,
            r_min: 0.02,
            beta: 1.0,
            lambda: 0.80,
        }
    }
}

impl GateParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Parameter(m));
        if !(self.epsilon > 0.0) {
            return fail(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return fail(format!("window must be odd, got {}", self.window));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return fail(format!("tau must lie in [0, 1), got {}", self.tau));
        }
        if !(0.0..=1.0).contains(&self.r_min) {
            return fail(format!("r_min must lie in [0, 1], got {}", self.r_min));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return fail(format!("beta must be >= 0, got {}", self.beta));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return fail(format!("lambda must lie in [0, 1), got {}", self.lambda));
        }
        Ok(())
    }
}

/// Temporal state of one video's gate: the last smoothed mask.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GateState {
    prev: Option<ScalarMap>,
}

impl GateState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_initialized(&self) -> bool {
        self.prev.is_some()
    }

    pub fn previous(&self) -> Option<&ScalarMap> {
        self.prev.as_ref()
    }
}

/// `n = f / (|f| + epsilon)`.
pub fn unit_flow(flow: &FlowField, epsilon: f64) -> UnitVectorField {
    let (w, h) = (flow.width(), flow.height());
    let mut nx = Vec::with_capacity(w * h);
    let mut ny = Vec::with_capacity(w * h);
    for (&u, &v) in flow.u().iter().zip(flow.v()) {
        let (u, v) = (u as f64, v as f64);
        let denom = u.hypot(v) + epsilon;
        nx.push(u / denom);
        ny.push(v / denom);
    }
    UnitVectorField {
        nx: ScalarMap::from_parts_unchecked(w, h, nx),
        ny: ScalarMap::from_parts_unchecked(w, h, ny),
    }
}

/// Resultant length of the box-averaged unit vectors, in `[0, 1]`.
pub fn coherence(field: &UnitVectorField, window: usize) -> Result<ScalarMap> {
    let mx = box_filter(&field.nx, window)?;
    let my = box_filter(&field.ny, window)?;
    let values = mx
        .values()
        .iter()
        .zip(my.values())
        .map(|(a, b)| a.hypot(*b).min(1.0))
        .collect();
    Ok(ScalarMap::from_parts_unchecked(field.width(), field.height(), values))
}

/// `clamp((c - tau) / (1 - tau), 0, 1)`.
pub fn soft_threshold_coherence(c: &ScalarMap, tau: f64) -> ScalarMap {
    c.map(|v| ((v - tau) / (1.0 - tau)).clamp(0.0, 1.0))
}

/// Magnitude relative to `d_t`, clamped to `[0, 1]`, zero below `r_min`.
pub fn magnitude_term(magnitude: &ScalarMap, d_t: f64, r_min: f64) -> ScalarMap {
    let floor = r_min * d_t;
    magnitude.map(|m| if m < floor { 0.0 } else { (m / d_t).clamp(0.0, 1.0) })
}

/// `q * w_c^beta`, with `0^0 = 1` so that `beta = 0` ignores coherence.
pub fn instantaneous_mask(q: &ScalarMap, w_c: &ScalarMap, beta: f64) -> Result<ScalarMap> {
    if !q.same_size(w_c) {
        return Err(Error::Argument("magnitude and coherence maps differ in size".into()));
    }
    let values = q
        .values()
        .iter()
        .zip(w_c.values())
        .map(|(&q, &c)| if beta == 0.0 { q } else { q * c.powf(beta) })
        .collect();
    Ok(ScalarMap::from_parts_unchecked(q.width(), q.height(), values))
}

/// Advance the moving average `lambda g_prev + (1 - lambda) g_inst`. The
/// first call adopts `g_inst` unchanged.
pub fn ema_update(state: &mut GateState, g_inst: &ScalarMap, lambda: f64) -> Result<ScalarMap> {
    let next = match &state.prev {
        None => g_inst.clone(),
        Some(prev) => {
            if !prev.same_size(g_inst) {
                return Err(Error::State(format!(
                    "gate initialised at {}x{}, got {}x{}",
                    prev.width(),
                    prev.height(),
                    g_inst.width(),
                    g_inst.height()
                )));
            }
            let values = prev
                .values()
                .iter()
                .zip(g_inst.values())
                .map(|(&p, &g)| p + (1.0 - lambda) * (g - p))
                .collect();
            ScalarMap::from_parts_unchecked(g_inst.width(), g_inst.height(), values)
        }
    };
    state.prev = Some(next.clone());
    Ok(next)
}

/// Instantaneous (unsmoothed) mask for one frame.
pub fn frame_mask(flow: &FlowField, d_t: f64, params: &GateParams) -> Result<ScalarMap> {
    if !(d_t > 0.0) {
        return Err(Error::Argument(format!("reference scale must be positive, got {d_t}")));
    }
    let n = unit_flow(flow, params.epsilon);
    let w_c = soft_threshold_coherence(&coherence(&n, params.window)?, params.tau);
    let q = magnitude_term(&flow.magnitude(), d_t, params.r_min);
    instantaneous_mask(&q, &w_c, params.beta)
}

/// Smoothed gate masks for a whole video, one per flow field.
pub fn gate_video(flows: &[FlowField], d_ts: &[f64], params: &GateParams) -> Result<Vec<ScalarMap>> {
    params.validate()?;
    if flows.len() != d_ts.len() {
        return Err(Error::Argument(format!(
            "{} flow fields but {} reference scales",
            flows.len(),
            d_ts.len()
        )));
    }
    if let Some(first) = flows.first() {
        if flows.iter().any(|f| !f.same_size(first)) {
            return Err(Error::Argument("flow fields differ in size".into()));
        }
    }
    let inst: Vec<ScalarMap> = flows
        .par_iter()
        .zip(d_ts.par_iter())
        .map(|(f, &d)| frame_mask(f, d, params))
        .collect::<Result<_>>()?;
    let mut state = GateState::new();
    inst.iter().map(|g| ema_update(&mut state, g, params.lambda)).collect()
}
