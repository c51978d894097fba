//! Appearance-free video toolkit.
//!
//! Converts ordinary action videos into motion-only stimuli (warped dense
//! noise and finite-lifetime random dots), renders coherence-gated HSV
//! motion encodings of dense optical flow, and scores recognition results
//! with accuracy metrics and within-subject statistics.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: frame/flow value types and primitive image operations.
//! * [`flow`]: dense two-frame optical flow (polynomial expansion, pyramid).
//! * [`encoding`]: flow to HSV motion video, horizontal flip with hue remap.
//! * [`gate`]: local orientation coherence gate with temporal smoothing.
//! * [`stimulus`]: dense-noise warping and random-dot kinematograms.
//! * [`stats`]: classification metrics and hypothesis tests.
//! * [`pipeline`]: configuration, file formats and batch orchestration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod encoding;
pub mod error;
pub mod flow;
pub mod gate;
pub mod pipeline;
pub mod stats;
pub mod stimulus;
pub mod tensor;

pub use error::{Error, Result};
