use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Stimulus domain a prediction was made on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dataset {
    Rgb,
    DenseNoise,
    RandomDot,
}

impl Dataset {
    pub const ALL: [Dataset; 3] = [Dataset::Rgb, Dataset::DenseNoise, Dataset::RandomDot];

    pub fn as_str(self) -> &'static str {
        match self {
            Dataset::Rgb => "RGB",
            Dataset::DenseNoise => "DENSE_NOISE",
            Dataset::RandomDot => "RANDOM_DOT",
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dataset {
    type Err = Error;

    /// Accepts the canonical tags and the UCF5 / AFD5 / AFF5 aliases.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "RGB" | "UCF5" => Ok(Dataset::Rgb),
            "DENSE_NOISE" | "AFD5" | "AFD" => Ok(Dataset::DenseNoise),
            "RANDOM_DOT" | "AFF5" | "AFF" => Ok(Dataset::RandomDot),
            other => Err(Error::Validation(format!("unknown dataset tag {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictionRecord {
    pub video_id: String,
    pub dataset: Dataset,
    pub true_label: usize,
    pub predicted_label: usize,
}

pub fn top1_accuracy(preds: &[PredictionRecord]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::Argument("no predictions to score".into()));
    }
    let hits = preds.iter().filter(|p| p.true_label == p.predicted_label).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Counts indexed `[true][predicted]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }
}

pub fn confusion_matrix(preds: &[PredictionRecord], num_classes: usize) -> Result<ConfusionMatrix> {
    if num_classes < 2 {
        return Err(Error::Argument(format!("need at least 2 classes, got {num_classes}")));
    }
    let mut counts = vec![vec![0u64; num_classes]; num_classes];
    for p in preds {
        if p.true_label >= num_classes || p.predicted_label >= num_classes {
            return Err(Error::Validation(format!(
                "{}: label outside 0..{num_classes}",
                p.video_id
            )));
        }
        counts[p.true_label][p.predicted_label] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Mean of the zero-shot accuracies on the two appearance-free domains.
pub fn transfer_score(acc_dense: f64, acc_dot: f64) -> f64 {
    (acc_dense + acc_dot) / 2.0
}
