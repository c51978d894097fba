use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use afv_core::encoding::encode_hsv_video;
use afv_core::flow::estimate_video_flow;
use afv_core::pipeline::{
    analyze_responses, collect_training_scale, load_flows, load_frames, parse_stages, read_predictions, read_responses,
    read_scale_report, run_pipeline, save_flows, save_frames, score_predictions, write_atomic, FramePattern,
    PipelineConfig, Report, VideoManifest, DEFAULT_FRAME_RATE,
};
use afv_core::stimulus::{synthesize_dot_video, synthesize_noise_video, DotParams};
use afv_core::{Error, Result};

/// Appearance-free video tools: optical flow, motion encodings, stimulus
/// synthesis and recognition statistics.
#[derive(Parser)]
#[command(name = "afv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Kv,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate dense flow between consecutive frames of a PNG sequence.
    Flow {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pipeline config file; only its [flow] and [io] sections are used.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Render a flow sequence as an HSV motion video.
    Encode {
        #[arg(long)]
        flows: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Attenuate the value channel with the coherence gate.
        #[arg(long)]
        gate: bool,
        /// Scale report from `afv scale collect`; overrides the config's p_train.
        #[arg(long)]
        scale_report: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Synthesize an appearance-free stimulus from a flow sequence.
    Synth {
        kind: SynthKind,
        #[arg(long)]
        flows: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Training-set flow magnitude scale.
    Scale {
        #[command(subcommand)]
        action: ScaleAction,
    },
    /// Score classifier predictions against a video manifest.
    Score {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        num_classes: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Statistics over a behavioural response table.
    Stats {
        #[arg(long)]
        responses: PathBuf,
        /// Conditions compared within order groups, `A,B`.
        #[arg(long)]
        pair: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run pipeline stages over every video in a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated subset of flow,gate,encode,synth-dots,synth-noise,metrics, or `all`.
        #[arg(long, default_value = "all")]
        stages: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Dots,
    Noise,
}

#[derive(Subcommand)]
enum ScaleAction {
    Collect {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn config_or_default(path: Option<&Path>) -> Result<PipelineConfig> {
    path.map_or_else(|| Ok(PipelineConfig::default()), PipelineConfig::load)
}

fn emit(report: &Report, format: Format) {
    match format {
        Format::Text => print!("{}", report.text),
        Format::Kv => print!("{}", report.to_kv()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Flow { input, out, params } => {
            let cfg = config_or_default(params.as_deref())?;
            let video = load_frames(&input, &FramePattern::parse(&cfg.io.frame_pattern)?)?;
            let flows = estimate_video_flow(&video, &cfg.flow)?;
            save_flows(&flows, &out)?;
            println!("{} flow fields written to {}", flows.len(), out.display());
        }
        Command::Encode {
            flows,
            out,
            gate,
            scale_report,
            config,
        } => {
            let mut cfg = config_or_default(config.as_deref())?;
            if let Some(p) = scale_report {
                cfg.normalization.p_train = read_scale_report(&p)?;
            }
            let flows = load_flows(&flows)?;
            let gated = gate || cfg.encode.gated;
            let video = encode_hsv_video(&flows, &cfg.normalization, gated.then_some(&cfg.gate))?;
            save_frames(&video, &out, &FramePattern::parse(&cfg.io.frame_pattern)?)?;
            println!("{} encoded frames written to {}", video.len(), out.display());
        }
        Command::Synth {
            kind,
            flows,
            out,
            seed,
            config,
        } => {
            let cfg = config_or_default(config.as_deref())?;
            let flows = load_flows(&flows)?;
            let video = match kind {
                SynthKind::Dots => {
                    let params = DotParams {
                        seed,
                        ..cfg.dots.clone()
                    };
                    synthesize_dot_video(&flows, &params, DEFAULT_FRAME_RATE)?
                }
                SynthKind::Noise => synthesize_noise_video(&flows, seed, DEFAULT_FRAME_RATE)?,
            };
            save_frames(&video, &out, &FramePattern::parse(&cfg.io.frame_pattern)?)?;
            println!("{} frames written to {}", video.len(), out.display());
        }
        Command::Scale {
            action: ScaleAction::Collect { manifest, out, config },
        } => {
            let cfg = config_or_default(config.as_deref())?;
            let manifest = VideoManifest::load(&manifest)?;
            let report =
                collect_training_scale(&manifest, &cfg.flow, &FramePattern::parse(&cfg.io.frame_pattern)?)?.to_report();
            write_atomic(&out, report.to_kv().as_bytes())?;
            print!("{}", report.text);
        }
        Command::Score {
            predictions,
            manifest,
            num_classes,
            format,
        } => {
            let manifest = VideoManifest::load(&manifest)?;
            let preds = read_predictions(&predictions)?;
            emit(&score_predictions(&preds, &manifest, num_classes)?, format);
        }
        Command::Stats {
            responses,
            pair,
            format,
        } => {
            let table = read_responses(&responses)?;
            let pair = match pair.as_deref() {
                Some(p) => Some(
                    p.split_once(',')
                        .ok_or_else(|| Error::Argument(format!("--pair expects A,B, got {p:?}")))?,
                ),
                None => None,
            };
            emit(&analyze_responses(&table, pair)?, format);
        }
        Command::Run {
            config,
            manifest,
            out,
            stages,
        } => {
            let cfg = PipelineConfig::load(&config)?;
            let manifest = VideoManifest::load(&manifest)?;
            let summary = run_pipeline(&cfg, &manifest, &parse_stages(&stages)?, &out)?;
            print!("{}", summary.manifest().text);
            if summary.videos.iter().any(|v| v.metrics.is_some()) {
                print!("{}", summary.metrics().text);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("afv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
