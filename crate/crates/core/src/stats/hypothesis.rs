//! Within- and between-subject hypothesis tests.

use super::special::{chi2_sf, f_sf, t_two_sided_p};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnovaResult {
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub p: f64,
    pub partial_eta_sq: f64,
    pub ss_condition: f64,
    pub ss_subjects: f64,
    pub ss_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FriedmanResult {
    pub chi_sq: f64,
    pub df: f64,
    pub p: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased (n - 1) sample variance.
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Paired t-test on `x - y`.
pub fn paired_t_test(x: &[f64], y: &[f64]) -> Result<TTest> {
    if x.len() != y.len() {
        return Err(Error::Argument(format!(
            "paired samples differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Argument("paired t-test needs at least 2 pairs".into()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let var = sample_variance(&d);
    if !(var > 0.0) {
        return Err(Error::Degenerate("paired differences have zero variance".into()));
    }
    let n = d.len() as f64;
    let t = mean(&d) / (var / n).sqrt();
    let df = n - 1.0;
    Ok(TTest {
        t,
        df,
        p: t_two_sided_p(t, df),
    })
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite df.
pub fn welch_t_test(x: &[f64], y: &[f64]) -> Result<TTest> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::Argument("Welch t-test needs at least 2 values per group".into()));
    }
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (sx, sy) = (sample_variance(x) / nx, sample_variance(y) / ny);
    if !(sx + sy > 0.0) {
        return Err(Error::Degenerate("both groups have zero variance".into()));
    }
    let t = (mean(x) - mean(y)) / (sx + sy).sqrt();
    let df = (sx + sy).powi(2) / (sx * sx / (nx - 1.0) + sy * sy / (ny - 1.0));
    Ok(TTest {
        t,
        df,
        p: t_two_sided_p(t, df),
    })
}

fn check_design(cells: &[Vec<f64>]) -> Result<(usize, usize)> {
    let n = cells.len();
    if n < 2 {
        return Err(Error::Argument(format!("need at least 2 subjects, got {n}")));
    }
    let k = cells[0].len();
    if k < 2 {
        return Err(Error::Argument(format!("need at least 2 conditions, got {k}")));
    }
    if let Some(i) = cells.iter().position(|r| r.len() != k) {
        return Err(Error::Argument(format!(
            "subject {i} has {} conditions, expected {k}",
            cells[i].len()
        )));
    }
    Ok((n, k))
}

/// One-way repeated-measures ANOVA on a subjects x conditions table, without
/// sphericity correction.
pub fn rm_anova(cells: &[Vec<f64>]) -> Result<AnovaResult> {
    let (n, k) = check_design(cells)?;
    let (nf, kf) = (n as f64, k as f64);
    let grand = cells.iter().flatten().sum::<f64>() / (nf * kf);
    let ss_total: f64 = cells.iter().flatten().map(|v| (v - grand).powi(2)).sum();
    let ss_condition: f64 = (0..k)
        .map(|j| {
            let m = cells.iter().map(|r| r[j]).sum::<f64>() / nf;
            (m - grand).powi(2)
        })
        .sum::<f64>()
        * nf;
    let ss_subjects: f64 = cells.iter().map(|r| (mean(r) - grand).powi(2)).sum::<f64>() * kf;
    let ss_error = (ss_total - ss_condition - ss_subjects).max(0.0);
    if !(ss_total > 0.0) {
        return Err(Error::Degenerate("all cells are equal (zero total variance)".into()));
    }
    if ss_error <= ss_total * 1e-12 {
        return Err(Error::Degenerate(
            "zero residual variance: every subject shows the same condition effect".into(),
        ));
    }
    let df1 = kf - 1.0;
    let df2 = (kf - 1.0) * (nf - 1.0);
    let f = (ss_condition / df1) / (ss_error / df2);
    Ok(AnovaResult {
        f,
        df1,
        df2,
        p: f_sf(f, df1, df2),
        partial_eta_sq: ss_condition / (ss_condition + ss_error),
        ss_condition,
        ss_subjects,
        ss_error,
    })
}

/// Ranks 1..=k within a row, ties sharing their mean rank.
pub fn midranks(row: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
    let mut ranks = vec![0.0; row.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && row[order[j + 1]] == row[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Friedman rank test across conditions,
/// `chi2 = 12 / (n k (k+1)) sum R_j^2 - 3 n (k+1)`.
pub fn friedman_test(cells: &[Vec<f64>]) -> Result<FriedmanResult> {
    let (n, k) = check_design(cells)?;
    let mut rank_sums = vec![0.0; k];
    for row in cells {
        for (s, r) in rank_sums.iter_mut().zip(midranks(row)) {
            *s += r;
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = rank_sums.iter().map(|r| r * r).sum();
    let chi_sq = 12.0 * sum_sq / (nf * kf * (kf + 1.0)) - 3.0 * nf * (kf + 1.0);
    let df = kf - 1.0;
    Ok(FriedmanResult {
        chi_sq,
        df,
        p: chi2_sf(chi_sq.max(0.0), df),
    })
}
