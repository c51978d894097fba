//! File formats, configuration and the batch pipeline behind the `afv` CLI.
//!
//! Per-video outputs of [`run_pipeline`] live under `<out>/<video_id>/`:
//! `flow/flow_%06d.flo`, `gate/`, `encoded/`, `dots/` and `noise/` PNG
//! sequences, and `metrics/metrics.txt`.

mod analysis;
mod config;
mod csvio;
mod flo;
mod frames;
mod report;
mod run;

pub use analysis::{
    analyze_responses, collect_training_scale, read_scale_report, score_predictions, ScaleReport, VideoScale,
};
pub use config::{EncodeConfig, IoConfig, NoiseConfig, PipelineConfig, Provenance};
pub use csvio::{read_predictions, read_responses, ManifestEntry, Split, VideoManifest};
pub use flo::{flo_bytes, flow_pattern, load_flows, parse_flo, read_flo, save_flows, write_flo, FLO_MAGIC};
pub use frames::{encode_png, list_sequence, load_frames, save_frames, write_atomic, FramePattern, DEFAULT_FRAME_RATE};
pub use report::{format_p, parse_kv, Report};
pub use run::{parse_stages, run_pipeline, video_seed, RunSummary, Stage, VideoMetrics, VideoOutcome};
