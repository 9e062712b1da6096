//! Retrieval quality over IRMA codes: weighted code error, wrong-digit rate
//! and the suitability score that trades both against code length.
//!
//! Every digit position contributes independently; position `j` (1-based
//! within its axis) weighs `1 / (10 j)`. Mismatches are tallied as integer
//! half-units per position, so aggregates do not depend on summation order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barcode::Barcode;
use crate::error::{Error, Result};
use crate::irma::{IrmaCode, AXES, WILDCARD};
use crate::retrieval::{best_position, BarcodeIndex};

/// Branching factor assumed for every digit.
const DIGIT_BASE: f64 = 10.0;
const MAX_AXIS_LEN: usize = 4;

/// Mismatch counts in half-units, per 1-based digit position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MismatchTally {
    halves_by_position: [u64; MAX_AXIS_LEN],
    pairs: u64,
}

impl MismatchTally {
    pub fn of_pair(query: &IrmaCode, retrieved: &IrmaCode, wildcard_half: bool) -> Self {
        let mut t = MismatchTally {
            pairs: 1,
            ..Default::default()
        };
        for (qa, ra) in query.axes().zip(retrieved.axes()) {
            for (j, (&q, &r)) in qa.iter().zip(ra).enumerate() {
                t.halves_by_position[j] += delta_halves(q, r, wildcard_half);
            }
        }
        t
    }

    pub fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.halves_by_position.iter_mut().zip(other.halves_by_position) {
            *a += b;
        }
        self.pairs += other.pairs;
        self
    }

    pub fn pairs(&self) -> u64 {
        self.pairs
    }

    /// Weighted error summed over all tallied pairs.
    pub fn error(&self) -> f64 {
        self.halves_by_position
            .iter()
            .enumerate()
            .map(|(j, &h)| h as f64 / 2.0 / (DIGIT_BASE * (j + 1) as f64))
            .sum()
    }

    /// Mismatched characters, a wildcard half-match counting 0.5.
    pub fn wrong_chars(&self) -> f64 {
        self.halves_by_position.iter().sum::<u64>() as f64 / 2.0
    }

    pub fn wrong_rate_pct(&self) -> Option<f64> {
        (self.pairs > 0)
            .then(|| 100.0 * self.wrong_chars() / (CHARS_PER_CODE * self.pairs as f64))
    }
}

const CHARS_PER_CODE: f64 = 13.0;

/// 0 on equality, 2 on mismatch, 1 when either side is a wildcard and
/// `wildcard_half` is set.
fn delta_halves(q: u8, r: u8, wildcard_half: bool) -> u64 {
    if wildcard_half && (q == WILDCARD || r == WILDCARD) {
        1
    } else if q == r {
        0
    } else {
        2
    }
}

pub fn code_error(query: &IrmaCode, retrieved: &IrmaCode, wildcard_half: bool) -> f64 {
    MismatchTally::of_pair(query, retrieved, wildcard_half).error()
}

fn tally(pairs: &[(IrmaCode, IrmaCode)], wildcard_half: bool) -> MismatchTally {
    pairs
        .iter()
        .map(|(q, r)| MismatchTally::of_pair(q, r, wildcard_half))
        .fold(MismatchTally::default(), MismatchTally::merge)
}

pub fn total_error(pairs: &[(IrmaCode, IrmaCode)], wildcard_half: bool) -> f64 {
    tally(pairs, wildcard_half).error()
}

/// Percentage of wrong characters over all 13 positions of all pairs.
pub fn wrong_digit_rate(pairs: &[(IrmaCode, IrmaCode)], wildcard_half: bool) -> Result<f64> {
    tally(pairs, wildcard_half)
        .wrong_rate_pct()
        .ok_or(Error::NothingToEvaluate("wrong-digit rate of an empty pair list"))
}

/// Largest possible error of one pair without wildcards.
pub fn max_code_error() -> f64 {
    AXES.iter()
        .map(|&(_, len)| (1..=len).map(|j| 1.0 / (DIGIT_BASE * j as f64)).sum::<f64>())
        .sum()
}

/// Aggregate result of one retrieval run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    #[serde(rename = "method")]
    pub method_name: String,
    /// Wrong-digit rate in percent.
    #[serde(rename = "n_wrong_pct")]
    pub n_wrong_rate: f64,
    pub e_total: f64,
    /// Bits.
    #[serde(rename = "l_code")]
    pub code_length: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Suitability {
    pub method_name: String,
    pub eta: f64,
    pub rank: usize,
}

/// Ratio of the product of column maxima to each run's own product of
/// wrong-digit rate, total error and code length. Rows come back in rank
/// order: larger η first, ties to the smaller name.
pub fn suitability(runs: &[RunResult]) -> Result<Vec<Suitability>> {
    Ok(rank_runs(runs)?
        .into_iter()
        .enumerate()
        .map(|(i, (k, eta))| Suitability {
            method_name: runs[k].method_name.clone(),
            eta,
            rank: i + 1,
        })
        .collect())
}

/// `(run position, η)` in rank order.
pub(crate) fn rank_runs(runs: &[RunResult]) -> Result<Vec<(usize, f64)>> {
    if runs.is_empty() {
        return Err(Error::NothingToEvaluate("suitability of zero runs"));
    }
    for r in runs {
        let factors = [r.n_wrong_rate, r.e_total, r.code_length as f64];
        if factors.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::DegenerateRun(format!(
                "{} has factors {}, {}, {}",
                r.method_name, r.n_wrong_rate, r.e_total, r.code_length
            )));
        }
    }
    let max_wrong = runs.iter().map(|r| r.n_wrong_rate).fold(0.0, f64::max);
    let max_error = runs.iter().map(|r| r.e_total).fold(0.0, f64::max);
    let max_len = runs.iter().map(|r| r.code_length).max().unwrap_or(0) as f64;
    let numerator = max_wrong * max_error * max_len;

    let mut ranked: Vec<(usize, f64)> = runs
        .iter()
        .enumerate()
        .map(|(k, r)| (k, numerator / (r.n_wrong_rate * r.e_total * r.code_length as f64)))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| runs[a.0].method_name.cmp(&runs[b.0].method_name))
    });
    Ok(ranked)
}

/// A labelled query image.
#[derive(Clone, Debug)]
pub struct Query {
    pub id: String,
    pub code: IrmaCode,
    pub barcode: Barcode,
}

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    /// Report name; defaults to the index encoder's method name.
    pub method_name: Option<String>,
    /// Skip the index record whose id equals the query id.
    pub exclude_self: bool,
    pub wildcard_half: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Retrieval {
    pub query_id: String,
    pub query_code: IrmaCode,
    pub retrieved_id: String,
    pub retrieved_code: IrmaCode,
    pub similarity: f64,
    pub error: f64,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub run: RunResult,
    pub retrievals: Vec<Retrieval>,
}

/// Retrieves the nearest labelled index record for every query and scores
/// the IRMA codes of each pair. Unlabelled index records are not candidates.
pub fn evaluate_run(index: &BarcodeIndex, queries: &[Query], opts: &EvalOptions) -> Result<Evaluation> {
    if queries.is_empty() {
        return Err(Error::NothingToEvaluate("empty query list"));
    }
    let retrievals = queries
        .par_iter()
        .map(|q| {
            let exclude = opts.exclude_self.then_some(q.id.as_str());
            let (pos, d) = best_position(&q.barcode, index, |r| {
                r.code.is_some() && Some(r.id.as_str()) != exclude
            })?
            .ok_or(Error::EmptyIndex)?;
            let rec = &index.records()[pos];
            let retrieved_code = rec.code.expect("candidates are labelled");
            Ok(Retrieval {
                query_id: q.id.clone(),
                query_code: q.code,
                retrieved_id: rec.id.clone(),
                retrieved_code,
                similarity: 1.0 - d as f64 / index.bit_len() as f64,
                error: code_error(&q.code, &retrieved_code, opts.wildcard_half),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let tally = retrievals
        .iter()
        .map(|r| MismatchTally::of_pair(&r.query_code, &r.retrieved_code, opts.wildcard_half))
        .fold(MismatchTally::default(), MismatchTally::merge);

    let run = RunResult {
        method_name: opts
            .method_name
            .clone()
            .unwrap_or_else(|| index.config().method_name()),
        n_wrong_rate: tally.wrong_rate_pct().expect("at least one query"),
        e_total: tally.error(),
        code_length: index.bit_len(),
    };
    Ok(Evaluation { run, retrievals })
}
