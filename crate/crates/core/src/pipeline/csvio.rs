//! CSV inputs: video manifests, model predictions, behavioural responses.
//! Every rejected row is reported with its 1-based line number (the header
//! is line 1).

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::stats::{Dataset, PredictionRecord, ResponseRow, ResponseTable};

struct Table {
    path: PathBuf,
    columns: HashMap<String, usize>,
    rows: Vec<(usize, csv::StringRecord)>,
}

impl Table {
    fn read(path: &Path, required: &[&str]) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(path, file, required)
    }

    fn from_reader(path: &Path, reader: impl std::io::Read, required: &[&str]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
        let columns: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_ascii_lowercase(), i))
            .collect();
        let missing: Vec<&str> = required.iter().copied().filter(|c| !columns.contains_key(*c)).collect();
        if !missing.is_empty() {
            return Err(Error::Validation(format!(
                "{}: missing column(s) {}",
                path.display(),
                missing.join(", ")
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Validation(format!("{}: line {}: {e}", path.display(), i + 2)))?;
            rows.push((i + 2, rec));
        }
        Ok(Table {
            path: path.to_path_buf(),
            columns,
            rows,
        })
    }

    fn err(&self, line: usize, msg: impl std::fmt::Display) -> Error {
        Error::Validation(format!("{}: line {line}: {msg}", self.path.display()))
    }

    fn field<'a>(&self, rec: &'a csv::StringRecord, col: &str) -> Option<&'a str> {
        self.columns
            .get(col)
            .and_then(|&i| rec.get(i))
            .filter(|s| !s.is_empty())
    }

    fn text(&self, line: usize, rec: &csv::StringRecord, col: &str) -> Result<String> {
        self.field(rec, col)
            .map(str::to_string)
            .ok_or_else(|| self.err(line, format!("empty {col}")))
    }

    fn parse<T: FromStr>(&self, line: usize, rec: &csv::StringRecord, col: &str) -> Result<T> {
        let s = self
            .field(rec, col)
            .ok_or_else(|| self.err(line, format!("empty {col}")))?;
        s.parse()
            .map_err(|_| self.err(line, format!("{col}: cannot parse {s:?}")))
    }

    fn parse_opt<T: FromStr>(&self, line: usize, rec: &csv::StringRecord, col: &str) -> Result<Option<T>> {
        match self.field(rec, col) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| self.err(line, format!("{col}: cannot parse {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl FromStr for Split {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub video_id: String,
    pub class_label: usize,
    pub frame_count: Option<usize>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    /// Frame directory, resolved against the manifest's directory.
    pub source_path: PathBuf,
    pub split: Split,
}

/// Video list: `video_id,class_label,frame_count,width,height,source_path,split`.
/// `frame_count`, `width` and `height` may be left empty.
#[derive(Clone, Debug, PartialEq)]
pub struct VideoManifest {
    pub entries: Vec<ManifestEntry>,
}

const MANIFEST_COLUMNS: [&str; 7] = [
    "video_id",
    "class_label",
    "frame_count",
    "width",
    "height",
    "source_path",
    "split",
];

impl VideoManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let table = Table::read(path, &MANIFEST_COLUMNS)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (line, rec) in &table.rows {
            let line = *line;
            let video_id = table.text(line, rec, "video_id")?;
            if !seen.insert(video_id.clone()) {
                return Err(table.err(line, format!("duplicate video_id {video_id}")));
            }
            if video_id.contains(['/', '\\']) || video_id == "." || video_id == ".." {
                return Err(table.err(line, format!("video_id {video_id:?} is not a valid directory name")));
            }
            let source: String = table.text(line, rec, "source_path")?;
            entries.push(ManifestEntry {
                class_label: table.parse(line, rec, "class_label")?,
                frame_count: table.parse_opt(line, rec, "frame_count")?,
                width: table.parse_opt(line, rec, "width")?,
                height: table.parse_opt(line, rec, "height")?,
                source_path: base.join(source),
                split: table.parse(line, rec, "split")?,
                video_id,
            });
        }
        if entries.is_empty() {
            return Err(Error::Validation(format!("{}: manifest has no videos", path.display())));
        }
        Ok(VideoManifest { entries })
    }

    pub fn get(&self, video_id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.video_id == video_id)
    }

    /// Number of classes implied by the labels: `max + 1`, at least 2.
    pub fn num_classes(&self) -> usize {
        self.entries.iter().map(|e| e.class_label + 1).max().unwrap_or(0).max(2)
    }
}

/// `video_id,dataset,true_label,predicted_label`.
pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let table = Table::read(path, &["video_id", "dataset", "true_label", "predicted_label"])?;
    table
        .rows
        .iter()
        .map(|(line, rec)| {
            let dataset = table.text(*line, rec, "dataset")?;
            Ok(PredictionRecord {
                video_id: table.text(*line, rec, "video_id")?,
                dataset: Dataset::from_str(&dataset).map_err(|e| table.err(*line, e))?,
                true_label: table.parse(*line, rec, "true_label")?,
                predicted_label: table.parse(*line, rec, "predicted_label")?,
            })
        })
        .collect()
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" => Some(false),
        _ => None,
    }
}

/// `participant,condition,trial,true_label,response,correct,rt_ms`, plus an
/// optional `order` column naming each participant's counterbalancing group.
/// `true_label`, `response` and `rt_ms` values may be empty.
pub fn read_responses(path: &Path) -> Result<ResponseTable> {
    let table = Table::read(
        path,
        &["participant", "condition", "trial", "true_label", "response", "correct"],
    )?;
    let mut rows = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let line = *line;
        let correct_s = table.text(line, rec, "correct")?;
        let correct =
            parse_bool(&correct_s).ok_or_else(|| table.err(line, format!("correct: not a boolean {correct_s:?}")))?;
        let rt_ms: Option<f64> = table.parse_opt(line, rec, "rt_ms")?;
        if let Some(rt) = rt_ms {
            if !(rt >= 0.0) {
                return Err(table.err(line, format!("rt_ms must be >= 0, got {rt}")));
            }
        }
        rows.push(ResponseRow {
            participant: table.text(line, rec, "participant")?,
            condition: table.text(line, rec, "condition")?,
            trial: table.parse(line, rec, "trial")?,
            true_label: table.parse_opt(line, rec, "true_label")?,
            response: table.parse_opt(line, rec, "response")?,
            correct,
            rt_ms,
            group: table.field(rec, "order").map(str::to_string),
        });
    }
    if rows.is_empty() {
        return Err(Error::Validation(format!("{}: no responses", path.display())));
    }
    Ok(ResponseTable::new(rows))
}
