use std::path::Path;

use log::warn;
use rayon::prelude::*;

use super::csvio::{Split, VideoManifest};
use super::frames::{load_frames, FramePattern};
use super::report::{format_p, parse_kv, Report};
use crate::encoding::frame_p95;
use crate::error::{Error, Result};
use crate::flow::{estimate_video_flow, FlowParams};
use crate::stats::{
    accuracy_by_condition, confusion_matrix, friedman_test, paired_t_test, rm_anova, top1_accuracy, transfer_score,
    welch_t_test, Dataset, PredictionRecord, ResponseTable,
};

/// Per-dataset top-1 accuracy, confusion matrices and the Transfer Score.
pub fn score_predictions(
    preds: &[PredictionRecord],
    manifest: &VideoManifest,
    num_classes: Option<usize>,
) -> Result<Report> {
    if preds.is_empty() {
        return Err(Error::Validation("no predictions".into()));
    }
    let k = num_classes.unwrap_or_else(|| manifest.num_classes());
    for (i, p) in preds.iter().enumerate() {
        let entry = manifest
            .get(&p.video_id)
            .ok_or_else(|| Error::Validation(format!("prediction {}: unknown video_id {}", i + 1, p.video_id)))?;
        if p.true_label >= k || p.predicted_label >= k {
            return Err(Error::Validation(format!(
                "prediction {}: label outside 0..{k} for {}",
                i + 1,
                p.video_id
            )));
        }
        if p.true_label != entry.class_label {
            return Err(Error::Validation(format!(
                "prediction {}: true_label {} disagrees with manifest label {} for {}",
                i + 1,
                p.true_label,
                entry.class_label,
                p.video_id
            )));
        }
    }

    let mut report = Report::default();
    report.line(format!("Top-1 accuracy ({k} classes, chance {:.4})", 1.0 / k as f64));
    report.kv("num_classes", k);
    let mut accuracy = std::collections::HashMap::new();
    let mut present = Vec::new();
    for ds in Dataset::ALL {
        let subset: Vec<PredictionRecord> = preds.iter().filter(|p| p.dataset == ds).cloned().collect();
        if subset.is_empty() {
            continue;
        }
        present.push(ds.as_str());
        let acc = top1_accuracy(&subset)?;
        let cm = confusion_matrix(&subset, k)?;
        accuracy.insert(ds, acc);
        report.line(format!("  {:<12} n={:<6} accuracy={acc:.4}", ds.as_str(), subset.len()));
        report.kv(format!("{ds}.n"), subset.len());
        report.kv(format!("{ds}.accuracy"), acc);
        for (i, row) in cm.rows().iter().enumerate() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            report.line(format!("    true {i}: {}", cells.join(" ")));
            report.kv(format!("{ds}.confusion.{i}"), cells.join(" "));
        }
    }
    report.entries.insert(1, ("datasets".into(), present.join(",")));
    if let (Some(&d), Some(&r)) = (accuracy.get(&Dataset::DenseNoise), accuracy.get(&Dataset::RandomDot)) {
        let ts = transfer_score(d, r);
        report.line(format!("Transfer Score = {ts:.4}"));
        report.kv("transfer_score", ts);
    }
    Ok(report)
}

fn resolve_pair(conditions: &[String], pair: Option<(&str, &str)>) -> Result<(String, String)> {
    if let Some((a, b)) = pair {
        for c in [a, b] {
            if !conditions.iter().any(|x| x == c) {
                return Err(Error::Validation(format!("unknown condition {c:?} in comparison pair")));
            }
        }
        return Ok((a.to_string(), b.to_string()));
    }
    let find = |ds: Dataset| {
        conditions
            .iter()
            .find(|c| c.parse::<Dataset>().ok() == Some(ds))
            .cloned()
    };
    match (find(Dataset::DenseNoise), find(Dataset::RandomDot)) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => {
            let n = conditions.len();
            Ok((conditions[n - 2].clone(), conditions[n - 1].clone()))
        }
    }
}

/// Accuracy matrix, repeated-measures ANOVA and Friedman test across
/// conditions; with a two-group `order` column, paired t-tests of the
/// comparison pair within each group and a Welch test of the paired
/// differences between groups.
pub fn analyze_responses(table: &ResponseTable, pair: Option<(&str, &str)>) -> Result<Report> {
    let acc = accuracy_by_condition(table)?;
    let n = acc.participants.len();
    let mut report = Report::default();
    report.line(format!("Participants: {n}"));
    report.kv("participants", n);
    report.kv("conditions", acc.conditions.join(","));
    for (j, c) in acc.conditions.iter().enumerate() {
        report.line(format!("  {c:<12} accuracy {:.4} ± {:.4}", acc.means[j], acc.sds[j]));
        report.kv(format!("accuracy.{c}.mean"), acc.means[j]);
        report.kv(format!("accuracy.{c}.sd"), acc.sds[j]);
    }

    let a = rm_anova(&acc.cells)?;
    report.line(format!(
        "Repeated-measures ANOVA: F({},{})={:.2}, p={}, partial eta^2={:.3}",
        a.df1,
        a.df2,
        a.f,
        format_p(a.p),
        a.partial_eta_sq
    ));
    report.kv("anova.F", a.f);
    report.kv("anova.df1", a.df1);
    report.kv("anova.df2", a.df2);
    report.kv("anova.p", a.p);
    report.kv("anova.partial_eta_sq", a.partial_eta_sq);

    let fr = friedman_test(&acc.cells)?;
    report.line(format!(
        "Friedman: chi2({})={:.2}, p={}",
        fr.df,
        fr.chi_sq,
        format_p(fr.p)
    ));
    report.kv("friedman.chi_sq", fr.chi_sq);
    report.kv("friedman.df", fr.df);
    report.kv("friedman.p", fr.p);

    let groups = table.groups()?;
    if groups.iter().all(|(_, g)| g.is_none()) {
        return Ok(report);
    }
    if let Some((p, _)) = groups.iter().find(|(_, g)| g.is_none()) {
        return Err(Error::Validation(format!("participant {p} has no order group")));
    }
    let mut names: Vec<&str> = Vec::new();
    for (_, g) in &groups {
        let g = g.as_deref().unwrap();
        if !names.contains(&g) {
            names.push(g);
        }
    }
    if names.len() != 2 {
        report.line(format!(
            "Order groups: {} found, group comparison needs exactly 2",
            names.len()
        ));
        return Ok(report);
    }
    let (ca, cb) = resolve_pair(&acc.conditions, pair)?;
    let col_a = acc.column(&ca).expect("resolved condition");
    let col_b = acc.column(&cb).expect("resolved condition");
    report.kv("pair", format!("{ca},{cb}"));
    let mut diffs = Vec::new();
    for name in &names {
        let idx: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(_, (_, g))| g.as_deref() == Some(*name))
            .map(|(i, _)| i)
            .collect();
        let xa: Vec<f64> = idx.iter().map(|&i| col_a[i]).collect();
        let xb: Vec<f64> = idx.iter().map(|&i| col_b[i]).collect();
        let t = paired_t_test(&xa, &xb)?;
        report.line(format!(
            "  {name} (N={}): {ca} vs {cb}, paired t({})={:.2}, p={}",
            idx.len(),
            t.df,
            t.t,
            format_p(t.p)
        ));
        report.kv(format!("paired.{name}.n"), idx.len());
        report.kv(format!("paired.{name}.t"), t.t);
        report.kv(format!("paired.{name}.df"), t.df);
        report.kv(format!("paired.{name}.p"), t.p);
        diffs.push(xa.iter().zip(&xb).map(|(a, b)| a - b).collect::<Vec<f64>>());
    }
    let w = welch_t_test(&diffs[0], &diffs[1])?;
    report.line(format!(
        "  {ca} - {cb} difference by order: Welch t={:.3}, df={:.2}, p={}",
        w.t,
        w.df,
        format_p(w.p)
    ));
    report.kv("welch.t", w.t);
    report.kv("welch.df", w.df);
    report.kv("welch.p", w.p);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VideoScale {
    pub video_id: String,
    pub frames: usize,
    pub mean_p95: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleReport {
    /// Mean over all training frames of the per-frame 95th percentile.
    pub p_train: f64,
    pub frames: usize,
    pub videos: Vec<VideoScale>,
    pub skipped: Vec<String>,
}

impl ScaleReport {
    pub fn to_report(&self) -> Report {
        let mut r = Report::default();
        r.line(format!(
            "p_train = {:.6} over {} flow frames from {} videos",
            self.p_train,
            self.frames,
            self.videos.len()
        ));
        r.kv("p_train", self.p_train);
        r.kv("frames", self.frames);
        r.kv("videos", self.videos.len());
        r.kv("skipped", self.skipped.join(","));
        for v in &self.videos {
            r.line(format!(
                "  {:<20} frames={:<5} mean_p95={:.6}",
                v.video_id, v.frames, v.mean_p95
            ));
            r.kv(format!("video.{}.frames", v.video_id), v.frames);
            r.kv(format!("video.{}.mean_p95", v.video_id), v.mean_p95);
        }
        r
    }
}

/// Pool per-frame 95th-percentile flow magnitudes over the training split.
pub fn collect_training_scale(
    manifest: &VideoManifest,
    params: &FlowParams,
    pattern: &FramePattern,
) -> Result<ScaleReport> {
    let train: Vec<_> = manifest.entries.iter().filter(|e| e.split == Split::Train).collect();
    if train.is_empty() {
        return Err(Error::Validation("manifest has no training videos".into()));
    }
    let results: Vec<(String, Result<Vec<f64>>)> = train
        .par_iter()
        .map(|e| {
            let r = load_frames(&e.source_path, pattern)
                .and_then(|v| estimate_video_flow(&v, params))
                .map(|flows| flows.iter().map(frame_p95).collect());
            (e.video_id.clone(), r)
        })
        .collect();
    let mut videos = Vec::new();
    let mut skipped = Vec::new();
    let (mut total, mut frames) = (0.0, 0usize);
    for (id, r) in results {
        match r {
            Ok(p95s) => {
                total += p95s.iter().sum::<f64>();
                frames += p95s.len();
                videos.push(VideoScale {
                    mean_p95: p95s.iter().sum::<f64>() / p95s.len() as f64,
                    frames: p95s.len(),
                    video_id: id,
                });
            }
            Err(e) => {
                warn!("skipping {id}: {e}");
                skipped.push(id);
            }
        }
    }
    if videos.is_empty() {
        return Err(Error::Validation(format!(
            "no readable training videos ({} skipped)",
            skipped.len()
        )));
    }
    Ok(ScaleReport {
        p_train: total / frames as f64,
        frames,
        videos,
        skipped,
    })
}

/// `p_train` from a scale report written by [`ScaleReport::to_report`].
pub fn read_scale_report(path: &Path) -> Result<f64> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value = parse_kv(&text)
        .into_iter()
        .find(|(k, _)| k == "p_train")
        .ok_or_else(|| Error::format(path, "no p_train entry"))?
        .1;
    value
        .parse()
        .map_err(|_| Error::format(path, format!("p_train is not a number: {value:?}")))
}
