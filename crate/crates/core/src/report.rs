//! Result tables: a fixed-width text table and one JSON object per line.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{rank_runs, RunResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub n_wrong_pct: f64,
    pub e_total: f64,
    pub l_code: usize,
    pub eta: Option<f64>,
    pub rank: Option<usize>,
}

/// Rows in rank order when η is defined for the set of runs, otherwise in
/// input order with η and rank left empty.
pub fn build_report(runs: &[RunResult]) -> Vec<ReportRow> {
    let row = |r: &RunResult, eta, rank| ReportRow {
        method: r.method_name.clone(),
        n_wrong_pct: r.n_wrong_rate,
        e_total: r.e_total,
        l_code: r.code_length,
        eta,
        rank,
    };
    match rank_runs(runs) {
        Ok(ranked) => ranked
            .iter()
            .enumerate()
            .map(|(i, &(k, eta))| row(&runs[k], Some(eta), Some(i + 1)))
            .collect(),
        Err(_) => runs.iter().map(|r| row(r, None, None)).collect(),
    }
}

pub fn format_table(rows: &[ReportRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.method.chars().count())
        .chain(["Annotation".len()])
        .max()
        .unwrap_or(10);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>8}  {:>9}  {:>6}  {:>8}  {:>4}",
        "Annotation", "n_wrong", "E_total", "L_code", "eta", "Rank"
    );
    for r in rows {
        let eta = r.eta.map_or_else(|| "-".to_string(), |e| format!("{e:.3}"));
        let rank = r.rank.map_or_else(|| "-".to_string(), |k| k.to_string());
        let _ = writeln!(
            out,
            "{:<width$}  {:>7.2}%  {:>9.2}  {:>6}  {:>8}  {:>4}",
            r.method, r.n_wrong_pct, r.e_total, r.l_code, eta, rank
        );
    }
    out
}

pub fn to_jsonl(rows: &[ReportRow]) -> String {
    rows.iter()
        .map(|r| serde_json::to_string(r).expect("plain data serializes") + "\n")
        .collect()
}

/// Reads run summaries, one JSON object per line with at least `method`,
/// `n_wrong_pct`, `e_total` and `l_code`. Blank lines are skipped.
pub fn parse_runs_jsonl(text: &str) -> Result<Vec<RunResult>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<RunResult>(l).map_err(|e| Error::RunLine {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}
