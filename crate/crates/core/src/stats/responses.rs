use std::collections::HashMap;

use crate::error::{Error, Result};

/// One behavioural trial.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseRow {
    pub participant: String,
    pub condition: String,
    pub trial: u32,
    pub true_label: Option<u32>,
    pub response: Option<u32>,
    pub correct: bool,
    pub rt_ms: Option<f64>,
    /// Counterbalancing group (block order), when recorded.
    pub group: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResponseTable {
    pub rows: Vec<ResponseRow>,
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

impl ResponseTable {
    pub fn new(rows: Vec<ResponseRow>) -> Self {
        ResponseTable { rows }
    }

    /// Participants in order of first appearance.
    pub fn participants(&self) -> Vec<String> {
        first_seen(self.rows.iter().map(|r| r.participant.as_str()))
    }

    /// Conditions in order of first appearance.
    pub fn conditions(&self) -> Vec<String> {
        first_seen(self.rows.iter().map(|r| r.condition.as_str()))
    }

    /// Group of each participant; a participant listed under two groups is
    /// a validation error.
    pub fn groups(&self) -> Result<Vec<(String, Option<String>)>> {
        let mut seen: HashMap<&str, Option<&str>> = HashMap::new();
        for r in &self.rows {
            let g = r.group.as_deref();
            match seen.get(r.participant.as_str()) {
                Some(prev) if *prev != g => {
                    return Err(Error::Validation(format!(
                        "participant {} appears in groups {:?} and {:?}",
                        r.participant, prev, g
                    )))
                }
                _ => {
                    seen.insert(&r.participant, g);
                }
            }
        }
        Ok(self
            .participants()
            .into_iter()
            .map(|p| {
                let g = seen[p.as_str()].map(str::to_string);
                (p, g)
            })
            .collect())
    }
}

/// Per-participant accuracy for every condition plus group summaries.
#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyMatrix {
    pub participants: Vec<String>,
    pub conditions: Vec<String>,
    /// `cells[participant][condition]`.
    pub cells: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    /// Sample (n - 1) standard deviations across participants.
    pub sds: Vec<f64>,
}

impl AccuracyMatrix {
    pub fn column(&self, condition: &str) -> Option<Vec<f64>> {
        let j = self.conditions.iter().position(|c| c == condition)?;
        Some(self.cells.iter().map(|r| r[j]).collect())
    }
}

pub fn accuracy_by_condition(table: &ResponseTable) -> Result<AccuracyMatrix> {
    if table.rows.is_empty() {
        return Err(Error::Argument("response table is empty".into()));
    }
    let participants = table.participants();
    let conditions = table.conditions();
    let pi: HashMap<&str, usize> = participants.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let ci: HashMap<&str, usize> = conditions.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut hits = vec![vec![0u64; conditions.len()]; participants.len()];
    let mut totals = vec![vec![0u64; conditions.len()]; participants.len()];
    for r in &table.rows {
        let (i, j) = (pi[r.participant.as_str()], ci[r.condition.as_str()]);
        totals[i][j] += 1;
        hits[i][j] += r.correct as u64;
    }
    let missing: Vec<String> = participants
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            let totals = &totals;
            conditions
                .iter()
                .enumerate()
                .filter(move |(j, _)| totals[i][*j] == 0)
                .map(move |(_, c)| format!("({p}, {c})"))
        })
        .collect();
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "incomplete design, missing cells: {}",
            missing.join(", ")
        )));
    }
    let cells: Vec<Vec<f64>> = hits
        .iter()
        .zip(&totals)
        .map(|(h, t)| h.iter().zip(t).map(|(&h, &t)| h as f64 / t as f64).collect())
        .collect();
    let n = participants.len() as f64;
    let means: Vec<f64> = (0..conditions.len())
        .map(|j| cells.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let sds = (0..conditions.len())
        .map(|j| {
            if participants.len() < 2 {
                return 0.0;
            }
            let ss: f64 = cells.iter().map(|r| (r[j] - means[j]).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        })
        .collect();
    Ok(AccuracyMatrix {
        participants,
        conditions,
        cells,
        means,
        sds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: &str, c: &str, ok: bool) -> ResponseRow {
        ResponseRow {
            participant: p.into(),
            condition: c.into(),
            trial: 0,
            true_label: None,
            response: None,
            correct: ok,
            rt_ms: None,
            group: None,
        }
    }

    #[test]
    fn three_of_four() {
        let t = ResponseTable::new(vec![
            row("p1", "RGB", true),
            row("p1", "RGB", true),
            row("p1", "RGB", false),
            row("p1", "RGB", true),
        ]);
        let m = accuracy_by_condition(&t).unwrap();
        assert_eq!(m.cells, vec![vec![0.75]]);
    }

    #[test]
    fn identical_participants_have_zero_sd() {
        let mut rows = Vec::new();
        for p in ["a", "b", "c"] {
            rows.push(row(p, "X", true));
            rows.push(row(p, "X", false));
        }
        let m = accuracy_by_condition(&ResponseTable::new(rows)).unwrap();
        assert_eq!(m.sds, vec![0.0]);
        assert_eq!(m.means, vec![0.5]);
    }

    #[test]
    fn missing_cell_is_reported() {
        let t = ResponseTable::new(vec![row("a", "X", true), row("a", "Y", true), row("b", "X", true)]);
        let err = accuracy_by_condition(&t).unwrap_err().to_string();
        assert!(err.contains("(b, Y)"), "{err}");
    }
}
