//! Exhaustive Hamming-similarity search over a barcode index.
//!
//! Ordering everywhere is similarity descending, then id ascending. Records
//! are kept sorted by id, so the id tie-break is the record position and
//! parallel reductions give the same answer as a sequential scan.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::barcode::{xor_popcount, Barcode};
use crate::encoder::EncoderConfig;
use crate::error::{Error, Result};
use crate::irma::IrmaCode;

#[derive(Clone, Debug, PartialEq)]
pub struct IndexRecord {
    pub id: String,
    pub code: Option<IrmaCode>,
    pub barcode: Barcode,
}

/// Immutable set of annotated barcodes built with a single encoder config.
#[derive(Clone, Debug, PartialEq)]
pub struct BarcodeIndex {
    config: EncoderConfig,
    records: Vec<IndexRecord>,
}

impl BarcodeIndex {
    /// Validates and sorts the records by id. Every barcode must carry the
    /// config's tag and bit length, and ids must be unique.
    pub fn new(config: EncoderConfig, mut records: Vec<IndexRecord>) -> Result<Self> {
        config.validate()?;
        let tag = config.tag();
        let len = config.bit_len();
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if r.barcode.bit_len() != len {
                return Err(Error::LengthMismatch {
                    left: r.barcode.bit_len(),
                    right: len,
                });
            }
            if r.barcode.tag() != Some(tag) {
                return Err(Error::Incompatible(format!(
                    "record {:?} is not a {} barcode",
                    r.id,
                    tag.method_name()
                )));
            }
            if r.id.is_empty() || r.id.contains(['\t', '\n', '\r']) {
                return Err(Error::InvalidId(r.id.clone()));
            }
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        records.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(BarcodeIndex {
            config: config.canonical(),
            records,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn records(&self) -> &[IndexRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn bit_len(&self) -> usize {
        self.config.bit_len()
    }

    pub fn get(&self, id: &str) -> Option<&IndexRecord> {
        self.records
            .binary_search_by(|r| r.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.records[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    pub id: String,
    pub similarity: f64,
    /// 1-based.
    pub rank: usize,
}

/// `1 - popcount(a XOR b) / len`.
pub fn hamming_similarity(a: &Barcode, b: &Barcode) -> Result<f64> {
    let d = a.hamming_distance(b)?;
    Ok(similarity_from_distance(d, a.bit_len()))
}

fn similarity_from_distance(distance: usize, len: usize) -> f64 {
    1.0 - distance as f64 / len as f64
}

fn check_query(query: &Barcode, index: &BarcodeIndex) -> Result<()> {
    if query.bit_len() != index.bit_len() {
        return Err(Error::LengthMismatch {
            left: query.bit_len(),
            right: index.bit_len(),
        });
    }
    if let Some(tag) = query.tag() {
        if tag != index.config.tag() {
            return Err(Error::Incompatible(format!(
                "{} query against a {} index",
                tag.method_name(),
                index.config.method_name()
            )));
        }
    }
    Ok(())
}

/// Position and Hamming distance of the best record accepted by `keep`.
pub(crate) fn best_position<F>(
    query: &Barcode,
    index: &BarcodeIndex,
    keep: F,
) -> Result<Option<(usize, usize)>>
where
    F: Fn(&IndexRecord) -> bool + Sync,
{
    check_query(query, index)?;
    let q = query.words();
    Ok(index
        .records
        .par_iter()
        .enumerate()
        .filter(|(_, r)| keep(r))
        .map(|(pos, r)| (xor_popcount(q, r.barcode.words()), pos))
        .min()
        .map(|(d, pos)| (pos, d)))
}

/// The most similar record, skipping `exclude_id`.
pub fn nearest(query: &Barcode, index: &BarcodeIndex, exclude_id: Option<&str>) -> Result<Match> {
    let (pos, d) = best_position(query, index, |r| Some(r.id.as_str()) != exclude_id)?
        .ok_or(Error::EmptyIndex)?;
    Ok(Match {
        id: index.records[pos].id.clone(),
        similarity: similarity_from_distance(d, index.bit_len()),
        rank: 1,
    })
}

/// The first `min(k, candidates)` records in nearest-first order.
pub fn top_k(
    query: &Barcode,
    index: &BarcodeIndex,
    k: usize,
    exclude_id: Option<&str>,
) -> Result<Vec<Match>> {
    check_query(query, index)?;
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let q = query.words();
    let mut scored: Vec<(usize, usize)> = index
        .records
        .par_iter()
        .enumerate()
        .filter(|(_, r)| Some(r.id.as_str()) != exclude_id)
        .map(|(pos, r)| (xor_popcount(q, r.barcode.words()), pos))
        .collect();
    if k < scored.len() {
        scored.select_nth_unstable(k - 1);
        scored.truncate(k);
    }
    scored.sort_unstable();
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, (d, pos))| Match {
            id: index.records[pos].id.clone(),
            similarity: similarity_from_distance(d, index.bit_len()),
            rank: i + 1,
        })
        .collect())
}
