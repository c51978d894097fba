use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::info;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::PipelineConfig;
use super::csvio::{ManifestEntry, VideoManifest};
use super::flo::{load_flows, save_flows};
use super::frames::{list_sequence, load_frames, save_frames, write_atomic, FramePattern, DEFAULT_FRAME_RATE};
use super::report::Report;
use crate::encoding::{encode_hsv_video, reference_scales};
use crate::error::{Error, Result};
use crate::flow::estimate_video_flow;
use crate::gate::gate_video;
use crate::stats::endpoint_error;
use crate::stimulus::{synthesize_dot_video, synthesize_noise_video, DotParams};
use crate::tensor::{Frame, FrameSequence, PixelLayout, ScalarMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Flow,
    Gate,
    Encode,
    SynthDots,
    SynthNoise,
    Metrics,
}

impl Stage {
    /// Execution order.
    pub const ALL: [Stage; 6] = [
        Stage::Flow,
        Stage::Gate,
        Stage::Encode,
        Stage::SynthDots,
        Stage::SynthNoise,
        Stage::Metrics,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Flow => "flow",
            Stage::Gate => "gate",
            Stage::Encode => "encode",
            Stage::SynthDots => "synth-dots",
            Stage::SynthNoise => "synth-noise",
            Stage::Metrics => "metrics",
        }
    }

    /// Output directory under each video's folder.
    pub fn dir_name(self) -> &'static str {
        match self {
            Stage::Flow => "flow",
            Stage::Gate => "gate",
            Stage::Encode => "encoded",
            Stage::SynthDots => "dots",
            Stage::SynthNoise => "noise",
            Stage::Metrics => "metrics",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim())
            .ok_or_else(|| Error::Argument(format!("unknown stage {s:?}")))
    }
}

/// Comma-separated stage list, or `all`. Returned sorted and deduplicated.
pub fn parse_stages(list: &str) -> Result<Vec<Stage>> {
    if list.trim() == "all" {
        return Ok(Stage::ALL.to_vec());
    }
    let mut stages = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Stage>>>()?;
    if stages.is_empty() {
        return Err(Error::Argument("no stages given".into()));
    }
    stages.sort();
    stages.dedup();
    Ok(stages)
}

/// Stage seed for one video: the base seed mixed with the video id.
pub fn video_seed(base: u64, video_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(video_id.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest length"))
}

fn has_artifacts(dir: &Path, pattern: &FramePattern) -> bool {
    dir.is_dir() && list_sequence(dir, pattern).is_ok()
}

/// Fail before doing any work if a stage needs something that is neither
/// scheduled nor already on disk.
fn check_ordering(stages: &[Stage], config: &PipelineConfig, out: &Path, videos: &[ManifestEntry]) -> Result<()> {
    let frames = FramePattern::parse(&config.io.frame_pattern)?;
    let flows = super::flo::flow_pattern();
    let planned = |s: Stage| stages.contains(&s);
    for e in videos {
        let base = out.join(&e.video_id);
        let need = |stage: Stage, needed: Stage, pattern: &FramePattern| -> Result<()> {
            let dir = base.join(needed.dir_name());
            if planned(stage) && !planned(needed) && !has_artifacts(&dir, pattern) {
                return Err(Error::Ordering(format!(
                    "{stage} for {} needs {needed} output {} (schedule {needed} or produce it first)",
                    e.video_id,
                    dir.display()
                )));
            }
            Ok(())
        };
        for s in [
            Stage::Gate,
            Stage::Encode,
            Stage::SynthDots,
            Stage::SynthNoise,
            Stage::Metrics,
        ] {
            need(s, Stage::Flow, &flows)?;
        }
        if config.encode.gated {
            need(Stage::Encode, Stage::Gate, &frames)?;
        }
        need(Stage::Metrics, Stage::SynthNoise, &frames)?;
    }
    Ok(())
}

fn mask_frame(mask: &ScalarMap) -> Result<Frame> {
    let data = mask.values().iter().map(|&g| g.clamp(0.0, 1.0) as f32).collect();
    Frame::new(mask.width(), mask.height(), PixelLayout::Gray, data)
}

/// Interior weight map excluding a border of `margin` pixels.
fn interior(width: usize, height: usize, margin: usize) -> ScalarMap {
    ScalarMap::from_fn(width, height, |x, y| {
        let inside = x >= margin && y >= margin && x + margin < width && y + margin < height;
        if inside {
            1.0
        } else {
            0.0
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VideoMetrics {
    pub frames: usize,
    pub noise_epe: f64,
    pub noise_angular_deg: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VideoOutcome {
    pub video_id: String,
    pub dots_seed: u64,
    pub noise_seed: u64,
    pub checksum: String,
    pub files: Vec<(String, String)>,
    pub metrics: Option<VideoMetrics>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub config_digest: String,
    pub stages: Vec<Stage>,
    pub videos: Vec<VideoOutcome>,
}

impl RunSummary {
    /// Run manifest: config digest, stages, seeds and checksums. Contains
    /// nothing run-specific so identical runs give identical manifests.
    pub fn manifest(&self) -> Report {
        let mut r = Report::default();
        let stages: Vec<&str> = self.stages.iter().map(|s| s.as_str()).collect();
        r.line(format!("config {}", self.config_digest));
        r.line(format!("stages {}", stages.join(",")));
        r.kv("config_sha256", &self.config_digest);
        r.kv("stages", stages.join(","));
        r.kv("videos", self.videos.len());
        for v in &self.videos {
            r.line(format!("{} {} ({} files)", v.video_id, v.checksum, v.files.len()));
            r.kv(format!("video.{}.dots_seed", v.video_id), v.dots_seed);
            r.kv(format!("video.{}.noise_seed", v.video_id), v.noise_seed);
            r.kv(format!("video.{}.sha256", v.video_id), &v.checksum);
            for (name, hash) in &v.files {
                r.kv(format!("file.{}/{name}", v.video_id), hash);
            }
        }
        r
    }

    pub fn metrics(&self) -> Report {
        let mut r = Report::default();
        let with: Vec<(&str, &VideoMetrics)> = self
            .videos
            .iter()
            .filter_map(|v| v.metrics.as_ref().map(|m| (v.video_id.as_str(), m)))
            .collect();
        r.line("Noise stimulus flow recovery (interior mean EPE, px)");
        for (id, m) in &with {
            r.line(format!(
                "  {id:<20} {:.4}  angular {:.3} deg",
                m.noise_epe, m.noise_angular_deg
            ));
            r.kv(format!("{id}.noise_epe"), m.noise_epe);
            r.kv(format!("{id}.noise_angular_deg"), m.noise_angular_deg);
        }
        if !with.is_empty() {
            let mean = with.iter().map(|(_, m)| m.noise_epe).sum::<f64>() / with.len() as f64;
            r.line(format!("  mean {mean:.4}"));
            r.kv("mean_noise_epe", mean);
        }
        r
    }
}

fn checksum_dir(base: &Path) -> Result<Vec<(String, String)>> {
    let mut files = Vec::new();
    let mut stack = vec![base.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let path: PathBuf = entry.map_err(|e| Error::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                let rel = path.strip_prefix(base).expect("under base");
                let name = rel
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/");
                files.push((name, hex::encode(Sha256::digest(&bytes))));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn run_video(entry: &ManifestEntry, config: &PipelineConfig, stages: &[Stage], out: &Path) -> Result<VideoOutcome> {
    let frames_pattern = FramePattern::parse(&config.io.frame_pattern)?;
    let base = out.join(&entry.video_id);
    let dir = |s: Stage| base.join(s.dir_name());
    let dots_seed = video_seed(config.dots.seed, &entry.video_id);
    let noise_seed = video_seed(config.noise.seed, &entry.video_id);
    fs::create_dir_all(&base).map_err(|e| Error::io(&base, e))?;

    let flows = if stages.contains(&Stage::Flow) {
        info!("{}: estimating flow", entry.video_id);
        let video = load_frames(&entry.source_path, &frames_pattern)?;
        let flows = estimate_video_flow(&video, &config.flow)?;
        save_flows(&flows, &dir(Stage::Flow))?;
        flows
    } else {
        load_flows(&dir(Stage::Flow))?
    };
    if flows.is_empty() {
        return Err(Error::Validation(format!(
            "{}: video has fewer than two frames",
            entry.video_id
        )));
    }

    if stages.contains(&Stage::Gate) {
        let d_ts = reference_scales(&flows, &config.normalization);
        let masks = gate_video(&flows, &d_ts, &config.gate)?;
        let frames = masks.iter().map(mask_frame).collect::<Result<Vec<_>>>()?;
        save_frames(
            &FrameSequence::new(frames, config.normalization.frame_rate)?,
            &dir(Stage::Gate),
            &frames_pattern,
        )?;
    }
    if stages.contains(&Stage::Encode) {
        let gate = config.encode.gated.then_some(&config.gate);
        let encoded = encode_hsv_video(&flows, &config.normalization, gate)?;
        save_frames(&encoded, &dir(Stage::Encode), &frames_pattern)?;
    }
    if stages.contains(&Stage::SynthDots) {
        let params = DotParams {
            seed: dots_seed,
            ..config.dots.clone()
        };
        let video = synthesize_dot_video(&flows, &params, DEFAULT_FRAME_RATE)?;
        save_frames(&video, &dir(Stage::SynthDots), &frames_pattern)?;
    }
    if stages.contains(&Stage::SynthNoise) {
        let video = synthesize_noise_video(&flows, noise_seed, DEFAULT_FRAME_RATE)?;
        save_frames(&video, &dir(Stage::SynthNoise), &frames_pattern)?;
    }
    let metrics = if stages.contains(&Stage::Metrics) {
        let noise = load_frames(&dir(Stage::SynthNoise), &frames_pattern)?;
        let recovered = estimate_video_flow(&noise, &config.flow)?;
        if recovered.len() != flows.len() {
            return Err(Error::Validation(format!(
                "{}: noise video has {} frames for {} flow fields",
                entry.video_id,
                noise.len(),
                flows.len()
            )));
        }
        let (w, h) = (flows[0].width(), flows[0].height());
        let mask = interior(w, h, 8.min(w / 4).min(h / 4));
        let (mut epe, mut ang) = (0.0, 0.0);
        for (est, truth) in recovered.iter().zip(&flows) {
            let e = endpoint_error(est, truth, Some(&mask))?;
            epe += e.mean_epe;
            ang += e.mean_angular_deg;
        }
        let n = flows.len() as f64;
        let m = VideoMetrics {
            frames: flows.len(),
            noise_epe: epe / n,
            noise_angular_deg: ang / n,
        };
        let mut r = Report::default();
        r.kv("noise_epe", m.noise_epe);
        r.kv("noise_angular_deg", m.noise_angular_deg);
        r.kv("flow_frames", m.frames);
        write_atomic(&dir(Stage::Metrics).join("metrics.txt"), r.to_kv().as_bytes())?;
        Some(m)
    } else {
        None
    };

    let files = checksum_dir(&base)?;
    let mut h = Sha256::new();
    for (name, hash) in &files {
        h.update(format!("{name}\t{hash}\n").as_bytes());
    }
    Ok(VideoOutcome {
        video_id: entry.video_id.clone(),
        dots_seed,
        noise_seed,
        checksum: hex::encode(h.finalize()),
        files,
        metrics,
    })
}

/// Run `stages` for every manifest video under `out/<video_id>/`, then
/// write `run_manifest.txt` (and `metrics.txt` when metrics ran).
pub fn run_pipeline(
    config: &PipelineConfig,
    manifest: &VideoManifest,
    stages: &[Stage],
    out: &Path,
) -> Result<RunSummary> {
    config.validate()?;
    if stages.is_empty() {
        return Err(Error::Argument("no stages given".into()));
    }
    let mut stages = stages.to_vec();
    stages.sort();
    stages.dedup();
    check_ordering(&stages, config, out, &manifest.entries)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.io.workers)
        .build()
        .map_err(|e| Error::Parameter(format!("worker pool: {e}")))?;
    let videos = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|e| run_video(e, config, &stages, out))
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = RunSummary {
        config_digest: config.digest(),
        stages,
        videos,
    };
    write_atomic(&out.join("run_manifest.txt"), summary.manifest().to_kv().as_bytes())?;
    if summary.stages.contains(&Stage::Metrics) {
        let m = summary.metrics();
        write_atomic(&out.join("metrics.txt"), m.to_kv().as_bytes())?;
    }
    Ok(summary)
}
