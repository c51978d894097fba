mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use afv_core::pipeline::{
    collect_training_scale, flo_bytes, load_flows, load_frames, parse_stages, read_flo, run_pipeline, save_frames,
    score_predictions, write_flo, FramePattern, PipelineConfig, Stage, VideoManifest,
};
use afv_core::stats::{Dataset, PredictionRecord};
use afv_core::tensor::{FlowField, Frame, FrameSequence, PixelLayout};
use afv_core::{flow::FlowParams, Error};
use common::{Lcg, PeriodicTexture};

fn pattern() -> FramePattern {
    FramePattern::parse("frame_%06d.png").unwrap()
}

fn translating_video(dir: &Path, frames: usize, step: (f64, f64), seed: u64) {
    let tex = PeriodicTexture::new(64, seed);
    let frames: Vec<Frame> = (0..frames)
        .map(|i| tex.frame(step.0 * i as f64, step.1 * i as f64))
        .collect();
    save_frames(&FrameSequence::new(frames, 25.0).unwrap(), dir, &pattern()).unwrap();
}

fn write_manifest(dir: &Path, rows: &[(&str, usize, &str)]) -> PathBuf {
    let mut text = String::from("video_id,class_label,frame_count,width,height,source_path,split\n");
    for (id, label, split) in rows {
        text.push_str(&format!("{id},{label},,,,videos/{id},{split}\n"));
    }
    let p = dir.join("manifest.csv");
    std::fs::write(&p, text).unwrap();
    p
}

fn afv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_afv"))
}

#[test]
fn png_sequence_round_trip_is_lossless() {
    let d = tempfile::tempdir().unwrap();
    let mut rng = Lcg(3);
    for layout in [PixelLayout::Gray, PixelLayout::Rgb] {
        let frames: Vec<Frame> = (0..10)
            .map(|_| {
                let bytes: Vec<u8> = (0..17 * 9 * layout.channels())
                    .map(|_| (rng.next_f64() * 256.0) as u8)
                    .collect();
                Frame::from_bytes(17, 9, layout, &bytes).unwrap()
            })
            .collect();
        let dir = d.path().join(format!("{layout:?}"));
        save_frames(&FrameSequence::new(frames.clone(), 25.0).unwrap(), &dir, &pattern()).unwrap();
        let back = load_frames(&dir, &pattern()).unwrap();
        assert_eq!(back.len(), 10);
        assert_eq!(back.layout(), layout);
        for (a, b) in frames.iter().zip(back.frames()) {
            assert_eq!(a.to_bytes(), b.to_bytes());
        }
    }
}

#[test]
fn bgr_frames_are_stored_as_rgb() {
    let d = tempfile::tempdir().unwrap();
    let bgr = Frame::from_bytes(1, 1, PixelLayout::Bgr, &[10, 20, 30]).unwrap();
    save_frames(&FrameSequence::new(vec![bgr], 25.0).unwrap(), d.path(), &pattern()).unwrap();
    let back = load_frames(d.path(), &pattern()).unwrap();
    assert_eq!(back.layout(), PixelLayout::Rgb);
    assert_eq!(back.frames()[0].to_bytes(), vec![30, 20, 10]);
}

#[test]
fn sequence_gap_is_named() {
    let d = tempfile::tempdir().unwrap();
    translating_video(d.path(), 7, (1.0, 0.0), 1);
    std::fs::remove_file(d.path().join("frame_000005.png")).unwrap();
    let err = load_frames(d.path(), &pattern()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("frame_000005.png"), "{err}");
}

#[test]
fn flo_format_contract() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("a.flo");
    let f = FlowField::new(
        2,
        2,
        vec![1.5, -0.25, 0.0, 3.0],
        vec![f32::MIN_POSITIVE, -7.0, 1e-30, 2.0],
    )
    .unwrap();
    write_flo(&p, &f).unwrap();
    assert_eq!(std::fs::metadata(&p).unwrap().len(), 44);
    let back = read_flo(&p).unwrap();
    assert_eq!(back.u(), f.u());
    assert_eq!(back.v(), f.v());

    let mut bytes = flo_bytes(&f);
    bytes[..4].copy_from_slice(&0.0f32.to_le_bytes());
    std::fs::write(&p, &bytes).unwrap();
    assert!(matches!(read_flo(&p), Err(Error::Format { .. })));

    let bytes = flo_bytes(&f);
    std::fs::write(&p, &bytes[..40]).unwrap();
    let err = read_flo(&p).unwrap_err();
    assert!(
        err.to_string().contains("expected 44") && err.to_string().contains("got 40"),
        "{err}"
    );
}

#[test]
fn training_scale_examples() {
    let d = tempfile::tempdir().unwrap();
    let videos = d.path().join("videos");
    translating_video(&videos.join("still"), 4, (0.0, 0.0), 1);
    translating_video(&videos.join("three"), 4, (3.0, 0.0), 2);
    translating_video(&videos.join("two"), 4, (0.0, 2.0), 3);
    translating_video(&videos.join("four"), 4, (4.0, 0.0), 4);
    let params = FlowParams::default();

    let m = VideoManifest::load(&write_manifest(
        d.path(),
        &[("still", 0, "train"), ("three", 1, "test")],
    ))
    .unwrap();
    let r = collect_training_scale(&m, &params, &pattern()).unwrap();
    assert!(r.p_train < 0.05, "{}", r.p_train);
    assert_eq!(r.videos.len(), 1);

    let m = VideoManifest::load(&write_manifest(d.path(), &[("three", 1, "train")])).unwrap();
    let r = collect_training_scale(&m, &params, &pattern()).unwrap();
    assert!((r.p_train - 3.0).abs() < 0.25, "{}", r.p_train);

    let m = VideoManifest::load(&write_manifest(d.path(), &[("two", 0, "train"), ("four", 1, "train")])).unwrap();
    let r = collect_training_scale(&m, &params, &pattern()).unwrap();
    assert!((r.p_train - 3.0).abs() < 0.25, "{}", r.p_train);
    assert_eq!(r.frames, 6);
    let mean_of_videos = r.videos.iter().map(|v| v.mean_p95).sum::<f64>() / 2.0;
    assert!((r.p_train - mean_of_videos).abs() < 1e-12);

    let m = VideoManifest::load(&write_manifest(
        d.path(),
        &[("missing", 0, "train"), ("three", 1, "train")],
    ))
    .unwrap();
    let r = collect_training_scale(&m, &params, &pattern()).unwrap();
    assert_eq!(r.skipped, vec!["missing".to_string()]);

    let m = VideoManifest::load(&write_manifest(d.path(), &[("missing", 0, "train")])).unwrap();
    assert!(collect_training_scale(&m, &params, &pattern()).is_err());
}

#[test]
fn run_flow_and_dots_count_contract_and_determinism() {
    let d = tempfile::tempdir().unwrap();
    translating_video(&d.path().join("videos/v1"), 13, (1.5, -0.5), 8);
    let m = VideoManifest::load(&write_manifest(d.path(), &[("v1", 0, "test")])).unwrap();
    let cfg = PipelineConfig::default();
    let stages = parse_stages("flow,synth-dots").unwrap();
    let out = d.path().join("out");
    let a = run_pipeline(&cfg, &m, &stages, &out).unwrap();
    assert_eq!(load_flows(&out.join("v1/flow")).unwrap().len(), 12);
    assert_eq!(load_frames(&out.join("v1/dots"), &pattern()).unwrap().len(), 13);
    let manifest_a = std::fs::read(out.join("run_manifest.txt")).unwrap();
    let b = run_pipeline(&cfg, &m, &stages, &out).unwrap();
    assert_eq!(a, b);
    assert_eq!(manifest_a, std::fs::read(out.join("run_manifest.txt")).unwrap());

    let out2 = d.path().join("out2");
    let c = run_pipeline(&cfg, &m, &stages, &out2).unwrap();
    assert_eq!(a.videos[0].checksum, c.videos[0].checksum);
}

#[test]
fn stage_ordering_is_enforced() {
    let d = tempfile::tempdir().unwrap();
    translating_video(&d.path().join("videos/v1"), 3, (1.0, 0.0), 8);
    let m = VideoManifest::load(&write_manifest(d.path(), &[("v1", 0, "test")])).unwrap();
    let out = d.path().join("out");
    let cfg = PipelineConfig::default();
    let err = run_pipeline(&cfg, &m, &[Stage::Gate], &out).unwrap_err();
    assert!(matches!(err, Error::Ordering(_)));
    assert!(err.to_string().contains("flow"), "{err}");

    let gated = PipelineConfig::from_toml("[encode]\ngated = true\n").unwrap();
    let err = run_pipeline(&gated, &m, &[Stage::Flow, Stage::Encode], &out).unwrap_err();
    assert!(matches!(err, Error::Ordering(_)), "{err}");
    assert!(!out.join("v1").exists());

    run_pipeline(&gated, &m, &[Stage::Flow, Stage::Gate, Stage::Encode], &out).unwrap();
    run_pipeline(&gated, &m, &[Stage::Encode], &out).unwrap();
    let err = run_pipeline(&cfg, &m, &[Stage::Metrics], &out).unwrap_err();
    assert!(err.to_string().contains("synth-noise"), "{err}");
}

#[test]
fn full_run_writes_metrics() {
    let d = tempfile::tempdir().unwrap();
    translating_video(&d.path().join("videos/v1"), 4, (2.0, 1.0), 5);
    translating_video(&d.path().join("videos/v2"), 4, (-1.0, 0.0), 6);
    let m = VideoManifest::load(&write_manifest(d.path(), &[("v1", 0, "test"), ("v2", 1, "test")])).unwrap();
    let out = d.path().join("out");
    let s = run_pipeline(&PipelineConfig::default(), &m, &Stage::ALL, &out).unwrap();
    assert_eq!(s.videos.len(), 2);
    assert_ne!(s.videos[0].noise_seed, s.videos[1].noise_seed);
    for v in &s.videos {
        let metrics = v.metrics.as_ref().unwrap();
        assert!(metrics.noise_epe < 1.0, "{}: {}", v.video_id, metrics.noise_epe);
    }
    assert!(out.join("metrics.txt").exists());
    assert!(out.join("v1/metrics/metrics.txt").exists());
    assert_eq!(load_frames(&out.join("v2/encoded"), &pattern()).unwrap().len(), 3);
}

fn preds(rows: &[(&str, Dataset, usize, usize)]) -> Vec<PredictionRecord> {
    rows.iter()
        .map(|&(id, dataset, t, p)| PredictionRecord {
            video_id: id.into(),
            dataset,
            true_label: t,
            predicted_label: p,
        })
        .collect()
}

#[test]
fn scoring_validates_and_reports() {
    let d = tempfile::tempdir().unwrap();
    let m = VideoManifest::load(&write_manifest(d.path(), &[("a", 0, "test"), ("b", 4, "test")])).unwrap();
    let all = preds(&[
        ("a", Dataset::Rgb, 0, 0),
        ("b", Dataset::Rgb, 4, 4),
        ("a", Dataset::DenseNoise, 0, 0),
        ("b", Dataset::RandomDot, 4, 4),
    ]);
    let r = score_predictions(&all, &m, None).unwrap();
    for ds in ["RGB", "DENSE_NOISE", "RANDOM_DOT"] {
        assert_eq!(r.get(&format!("{ds}.accuracy")), Some("1"));
    }
    assert_eq!(r.get("transfer_score"), Some("1"));
    assert!(score_predictions(&preds(&[("zz", Dataset::Rgb, 0, 0)]), &m, None).is_err());
    assert!(score_predictions(&preds(&[("a", Dataset::Rgb, 0, 5)]), &m, None).is_err());
    assert!(score_predictions(&preds(&[("a", Dataset::Rgb, 1, 1)]), &m, None).is_err());
}

#[test]
fn shuffled_labels_score_near_chance() {
    let d = tempfile::tempdir().unwrap();
    let ids: Vec<String> = (0..4000).map(|i| format!("v{i}")).collect();
    let rows: Vec<(&str, usize, &str)> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i % 5, "test"))
        .collect();
    let m = VideoManifest::load(&write_manifest(d.path(), &rows)).unwrap();
    let mut rng = Lcg(12);
    let p: Vec<PredictionRecord> = rows
        .iter()
        .map(|&(id, t, _)| PredictionRecord {
            video_id: id.into(),
            dataset: Dataset::DenseNoise,
            true_label: t,
            predicted_label: (rng.next_f64() * 5.0) as usize,
        })
        .collect();
    let r = score_predictions(&p, &m, Some(5)).unwrap();
    let acc: f64 = r.get("DENSE_NOISE.accuracy").unwrap().parse().unwrap();
    assert!((acc - 0.2).abs() < 0.02, "{acc}");
}

#[test]
fn config_rejects_unknown_keys() {
    let err = PipelineConfig::from_toml("[gate]\ntua = 0.3\n").unwrap_err();
    assert!(err.to_string().contains("tua"), "{err}");
    let cfg = PipelineConfig::default();
    assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn cli_end_to_end_and_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let src = d.path().join("videos/v1");
    translating_video(&src, 4, (1.0, 1.0), 2);
    let flows = d.path().join("flows");
    let st = afv()
        .args(["flow", "--in"])
        .arg(&src)
        .arg("--out")
        .arg(&flows)
        .output()
        .unwrap()
        .status;
    assert!(st.success());
    assert_eq!(load_flows(&flows).unwrap().len(), 3);

    let enc = d.path().join("enc");
    let st = afv()
        .args(["encode", "--gate", "--flows"])
        .arg(&flows)
        .arg("--out")
        .arg(&enc)
        .output()
        .unwrap()
        .status;
    assert!(st.success());
    assert_eq!(load_frames(&enc, &pattern()).unwrap().len(), 3);

    for kind in ["dots", "noise"] {
        let out = d.path().join(kind);
        let st = afv()
            .args(["synth", kind, "--seed", "3", "--flows"])
            .arg(&flows)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap()
            .status;
        assert!(st.success());
        assert_eq!(load_frames(&out, &pattern()).unwrap().len(), 4);
    }

    let manifest = write_manifest(d.path(), &[("v1", 2, "train")]);
    let scale = d.path().join("scale.txt");
    let st = afv()
        .args(["scale", "collect", "--manifest"])
        .arg(&manifest)
        .arg("--out")
        .arg(&scale)
        .output()
        .unwrap()
        .status;
    assert!(st.success());
    let p = afv_core::pipeline::read_scale_report(&scale).unwrap();
    assert!((p - 2f64.sqrt()).abs() < 0.2, "{p}");

    let cfg = d.path().join("cfg.toml");
    std::fs::write(&cfg, "[noise]\nseed = 9\n").unwrap();
    let st = afv()
        .args(["run", "--stages", "flow,synth-noise", "--config"])
        .arg(&cfg)
        .arg("--manifest")
        .arg(&manifest)
        .arg("--out")
        .arg(d.path().join("run"))
        .output()
        .unwrap()
        .status;
    assert!(st.success());

    let missing = afv()
        .args(["flow", "--in", "/nonexistent/dir", "--out"])
        .arg(d.path().join("x"))
        .output()
        .unwrap()
        .status;
    assert_eq!(missing.code(), Some(3));

    let degenerate = afv()
        .args(["stats", "--responses"])
        .arg(common::fixture("responses_all_correct.csv"))
        .output()
        .unwrap()
        .status;
    assert_eq!(degenerate.code(), Some(4));

    let preds = d.path().join("preds.csv");
    std::fs::write(&preds, "video_id,dataset,true_label,predicted_label\nnope,RGB,0,0\n").unwrap();
    let invalid = afv()
        .args(["score", "--predictions"])
        .arg(&preds)
        .arg("--manifest")
        .arg(&manifest)
        .output()
        .unwrap()
        .status;
    assert_eq!(invalid.code(), Some(2));

    let ordering = afv()
        .args(["run", "--stages", "gate", "--config"])
        .arg(&cfg)
        .arg("--manifest")
        .arg(&manifest)
        .arg("--out")
        .arg(d.path().join("empty"))
        .output()
        .unwrap()
        .status;
    assert_eq!(ordering.code(), Some(2));

    let out = afv()
        .args(["stats", "--format", "kv", "--responses"])
        .arg(common::fixture("responses_22x3.csv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("anova.df2 = 42"), "{text}");
}

#[test]
fn documented_config_is_the_default() {
    let readme = include_str!("../../../README.md");
    let start = readme.find("```toml\n").unwrap() + "```toml\n".len();
    let end = start + readme[start..].find("```").unwrap();
    let cfg = PipelineConfig::from_toml(&readme[start..end]).unwrap();
    assert_eq!(cfg, PipelineConfig::default());
}
