//! Dataset ingestion and barcode index files.
//!
//! Labels file: one `<id>;<irma code>` per line, `#` starts a comment.
//!
//! Index file, line oriented:
//!
//! ```text
//! RBCIDX 1 <encoder_tag> <n_p> <normalized_size> <bins_per_angle> <bit_length>
//! <id>\t<irma code or ->\t<hex barcode>
//! ...
//! #sha256 <hex digest of every byte above this line>
//! ```
//!
//! `n_p` and `bins_per_angle` are written as `0` for encoders without them.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::barcode::{Barcode, EncoderKind};
use crate::encoder::EncoderConfig;
use crate::error::{Error, Result};
use crate::evaluation::Query;
use crate::image::GrayImage;
use crate::irma::IrmaCode;
use crate::lbp::LbpConfig;
use crate::radon::RbcConfig;
use crate::retrieval::{BarcodeIndex, IndexRecord};

pub const INDEX_MAGIC: &str = "RBCIDX";
pub const INDEX_VERSION: u32 = 1;
const CHECKSUM_PREFIX: &str = "#sha256 ";

pub const IMAGE_EXTENSIONS: [&str; 4] = ["png", "bmp", "tif", "tiff"];

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub id: String,
    pub code: Option<IrmaCode>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labelled(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(|e| e.code.is_some())
    }
}

/// A labels-file row that could not be used.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelIssue {
    pub line: usize,
    pub id: Option<String>,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct Labels {
    pub codes: HashMap<String, IrmaCode>,
    /// Ids whose code row was malformed.
    pub rejected: HashSet<String>,
    pub issues: Vec<LabelIssue>,
}

pub fn parse_labels(text: &str) -> Labels {
    let mut labels = Labels::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let issue = |id: Option<&str>, reason: String| LabelIssue {
            line: i + 1,
            id: id.map(str::to_string),
            reason,
        };
        let Some((id, code)) = line.split_once(';') else {
            labels
                .issues
                .push(issue(None, "expected `<id>;<irma code>`".into()));
            continue;
        };
        let id = id.trim();
        if id.is_empty() {
            labels.issues.push(issue(None, "empty id".into()));
            continue;
        }
        match code.parse::<IrmaCode>() {
            Ok(c) => {
                if labels.codes.insert(id.to_string(), c).is_some() {
                    labels
                        .issues
                        .push(issue(Some(id), "duplicate label, later row kept".into()));
                }
            }
            Err(e) => {
                labels.rejected.insert(id.to_string());
                labels.issues.push(issue(Some(id), e.to_string()));
            }
        }
    }
    labels
}

#[derive(Clone, Debug, Default)]
pub struct Ingested {
    pub manifest: DatasetManifest,
    /// Unusable label rows; images whose row was malformed are left out of
    /// the manifest.
    pub skipped: Vec<LabelIssue>,
    pub warnings: Vec<String>,
}

/// Pairs every image in `image_dir` (non-recursive) with its label row by
/// file stem. Images without a row are kept unlabelled.
pub fn ingest(image_dir: &Path, labels_file: Option<&Path>) -> Result<Ingested> {
    let mut paths: Vec<PathBuf> = fs::read_dir(image_dir)
        .map_err(|e| Error::io(image_dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(image_dir, e)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file() && has_image_extension(p))
        .collect();
    paths.sort();

    let labels = match labels_file {
        Some(p) => parse_labels(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
        None => Labels::default(),
    };

    let mut out = Ingested {
        skipped: labels.issues.clone(),
        ..Default::default()
    };
    let mut seen = HashSet::new();
    for path in paths {
        let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
            out.warnings
                .push(format!("{}: file name is not valid UTF-8", path.display()));
            continue;
        };
        if !seen.insert(id.clone()) {
            out.warnings
                .push(format!("{}: duplicate id {id:?}, skipped", path.display()));
            continue;
        }
        if labels.rejected.contains(&id) && !labels.codes.contains_key(&id) {
            continue;
        }
        let code = labels.codes.get(&id).copied();
        out.manifest.entries.push(ManifestEntry { path, id, code });
    }
    let mut orphans: Vec<_> = labels.codes.keys().filter(|id| !seen.contains(*id)).collect();
    orphans.sort();
    out.warnings.extend(
        orphans
            .into_iter()
            .map(|id| format!("label {id:?} has no image")),
    );
    Ok(out)
}

fn has_image_extension(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

/// Reads an image file as grayscale. Color images are reduced with the
/// luma weights; 16-bit samples keep their full range.
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let read_err = |reason: String| Error::ImageRead {
        path: path.to_path_buf(),
        reason,
    };
    let img = image::open(path).map_err(|e| read_err(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = if img.color().has_color() {
        let rgb = img.into_rgb32f();
        let samples: Vec<f64> = rgb.into_raw().into_iter().map(f64::from).collect();
        GrayImage::from_rgb(w, h, &samples)
    } else {
        let luma = img.to_luma32f();
        GrayImage::new(w, h, luma.into_raw().into_iter().map(f64::from).collect())
    };
    gray.map_err(|e| read_err(e.to_string()))
}

#[derive(Debug)]
pub struct EncodeFailure {
    pub id: String,
    pub path: PathBuf,
    pub error: Error,
}

fn encode_entries<'a>(
    entries: &'a [ManifestEntry],
    config: &EncoderConfig,
) -> Vec<(&'a ManifestEntry, Result<Barcode>)> {
    entries
        .par_iter()
        .map(|e| (e, load_gray(&e.path).and_then(|img| config.encode(&img))))
        .collect()
}

#[derive(Debug)]
pub struct BuiltIndex {
    pub index: BarcodeIndex,
    pub failures: Vec<EncodeFailure>,
}

/// Encodes every manifest image in parallel. Images that fail to load are
/// reported and left out.
pub fn build_index(manifest: &DatasetManifest, config: &EncoderConfig) -> Result<BuiltIndex> {
    config.validate()?;
    let mut records = Vec::with_capacity(manifest.len());
    let mut failures = Vec::new();
    for (entry, result) in encode_entries(&manifest.entries, config) {
        match result {
            Ok(barcode) => records.push(IndexRecord {
                id: entry.id.clone(),
                code: entry.code,
                barcode,
            }),
            Err(error) => failures.push(EncodeFailure {
                id: entry.id.clone(),
                path: entry.path.clone(),
                error,
            }),
        }
    }
    if records.is_empty() {
        return Err(Error::NoImages);
    }
    Ok(BuiltIndex {
        index: BarcodeIndex::new(*config, records)?,
        failures,
    })
}

/// Encodes the labelled manifest entries as evaluation queries.
pub fn encode_queries(
    manifest: &DatasetManifest,
    config: &EncoderConfig,
) -> Result<(Vec<Query>, Vec<EncodeFailure>)> {
    config.validate()?;
    let labelled: Vec<ManifestEntry> = manifest.labelled().cloned().collect();
    let mut queries = Vec::with_capacity(labelled.len());
    let mut failures = Vec::new();
    for (entry, result) in encode_entries(&labelled, config) {
        match result {
            Ok(barcode) => queries.push(Query {
                id: entry.id.clone(),
                code: entry.code.expect("labelled entries only"),
                barcode,
            }),
            Err(error) => failures.push(EncodeFailure {
                id: entry.id.clone(),
                path: entry.path.clone(),
                error,
            }),
        }
    }
    Ok((queries, failures))
}

fn header_line(config: &EncoderConfig) -> String {
    format!(
        "{INDEX_MAGIC} {INDEX_VERSION} {} {} {} {} {}",
        config.kind(),
        config.n_p().unwrap_or(0),
        config.normalized_size(),
        config.bins_per_angle().unwrap_or(0),
        config.bit_len()
    )
}

/// The index file contents.
pub fn index_to_string(index: &BarcodeIndex) -> String {
    let mut body = header_line(index.config());
    body.push('\n');
    for r in index.records() {
        let code = r.code.map_or_else(|| "-".to_string(), |c| c.to_string());
        let _ = writeln!(body, "{}\t{}\t{}", r.id, code, r.barcode.to_hex());
    }
    let digest = hex::encode(Sha256::digest(body.as_bytes()));
    let _ = writeln!(body, "{CHECKSUM_PREFIX}{digest}");
    body
}

/// Writes through a temporary file in the target directory, then renames.
pub fn save_index(index: &BarcodeIndex, path: &Path) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(index_to_string(index).as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn load_index(path: &Path) -> Result<BarcodeIndex> {
    parse_index_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn parse_index_bytes(bytes: &[u8]) -> Result<BarcodeIndex> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::IndexLine {
        line: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        reason: "invalid UTF-8".into(),
    })?;
    parse_index(text)
}

fn parse_header(line: &str) -> Result<EncoderConfig> {
    let bad = |reason: &str| Error::IndexLine {
        line: 1,
        reason: reason.to_string(),
    };
    let fields: Vec<&str> = line.split(' ').collect();
    if fields.first() != Some(&INDEX_MAGIC) {
        return Err(bad("not a barcode index header"));
    }
    match fields.get(1) {
        Some(v) if *v == INDEX_VERSION.to_string() => {}
        Some(v) => {
            return Err(Error::IndexVersion {
                found: v.to_string(),
                supported: INDEX_VERSION,
            })
        }
        None => return Err(bad("missing version")),
    }
    if fields.len() != 7 {
        return Err(bad("expected 7 header fields"));
    }
    let kind: EncoderKind = fields[2].parse().map_err(|_| bad("unknown encoder tag"))?;
    let num = |i: usize| -> Result<usize> {
        let f = fields[i];
        // canonical decimal only, so that every distinct header is a distinct file
        if f.is_empty() || (f.len() > 1 && f.starts_with('0')) || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("malformed number"));
        }
        f.parse().map_err(|_| bad("malformed number"))
    };
    let (n_p, size, bins, bit_len) = (num(3)?, num(4)?, num(5)?, num(6)?);
    let n_p = u32::try_from(n_p).map_err(|_| bad("n_p out of range"))?;
    let config = match kind {
        EncoderKind::Rbc => EncoderConfig::Rbc(RbcConfig {
            n_p,
            normalized_size: size,
            bins_per_angle: bins,
        }),
        EncoderKind::Lbp | EncoderKind::Lrbp => {
            if bins != 0 || (kind == EncoderKind::Lbp && n_p != 0) {
                return Err(bad("unused header fields must be 0"));
            }
            let lbp = LbpConfig {
                normalized_size: size,
                lrbp_n_p: if kind == EncoderKind::Lbp {
                    LbpConfig::default().lrbp_n_p
                } else {
                    n_p
                },
            };
            if kind == EncoderKind::Lbp {
                EncoderConfig::Lbp(lbp)
            } else {
                EncoderConfig::Lrbp(lbp)
            }
        }
    };
    config.validate().map_err(|e| bad(&e.to_string()))?;
    if config.bit_len() != bit_len {
        return Err(bad("bit length disagrees with encoder config"));
    }
    Ok(config)
}

pub fn parse_index(text: &str) -> Result<BarcodeIndex> {
    if text.is_empty() {
        return Err(Error::IndexTruncated("empty file".into()));
    }
    let Some(body_and_sum) = text.strip_suffix('\n') else {
        return Err(Error::IndexTruncated("missing final newline".into()));
    };
    let (body_len, sum_line) = match body_and_sum.rfind('\n') {
        Some(i) => (i + 1, &body_and_sum[i + 1..]),
        None => (0, body_and_sum),
    };
    let body = &text[..body_len];
    let mut lines = body.lines();

    let header = match lines.next() {
        Some(h) => h,
        None if sum_line.starts_with(INDEX_MAGIC) => {
            // A lone header line: still report a version problem first.
            parse_header(sum_line)?;
            return Err(Error::IndexTruncated("missing checksum line".into()));
        }
        None => return Err(Error::IndexTruncated("missing header".into())),
    };
    let config = parse_header(header)?;
    let tag = config.tag();

    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let bad = |reason: String| Error::IndexLine {
            line: line_no,
            reason,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(bad(format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let code = match fields[1] {
            "-" => None,
            c => Some(c.parse::<IrmaCode>().map_err(|e| bad(e.to_string()))?),
        };
        if code.is_some_and(|c| c.to_string() != fields[1]) {
            return Err(bad("IRMA code is not in canonical form".into()));
        }
        let hex = fields[2];
        if hex.bytes().any(|b| b.is_ascii_uppercase()) {
            return Err(bad("barcode hex must be lowercase".into()));
        }
        let barcode = Barcode::from_hex(hex, config.bit_len())
            .map_err(|e| bad(e.to_string()))?
            .tagged(tag);
        records.push(IndexRecord {
            id: fields[0].to_string(),
            code,
            barcode,
        });
    }

    let Some(expected) = sum_line.strip_prefix(CHECKSUM_PREFIX) else {
        return Err(Error::IndexTruncated("missing checksum line".into()));
    };
    let actual = hex::encode(Sha256::digest(body.as_bytes()));
    if expected != actual {
        return Err(Error::IndexChecksum);
    }
    let index = BarcodeIndex::new(config, records)?;
    if index_to_string(&index) != text {
        // e.g. records out of order; the file must be exactly what we write
        return Err(Error::IndexLine {
            line: 1,
            reason: "records are not in canonical order".into(),
        });
    }
    Ok(index)
}
