use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty barcode")]
    EmptyBarcode,

    #[error("invalid hex barcode: {0}")]
    InvalidHex(String),

    #[error("barcode length mismatch: {left} vs {right} bits")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid encoder config: {0}")]
    InvalidConfig(String),

    #[error("projection angle {0} outside [0, 180)")]
    AngleOutOfRange(f64),

    #[error("pixel ({x}, {y}) is not an interior pixel")]
    BorderPixel { x: usize, y: usize },

    #[error("region {x},{y} {w}x{h} does not fit a {width}x{height} image")]
    RoiOutOfBounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        width: usize,
        height: usize,
    },

    /// Malformed IRMA code; the message names the offending group.
    #[error("invalid IRMA code {code:?}: {reason}")]
    IrmaParse { code: String, reason: String },

    #[error("no candidate records to search")]
    EmptyIndex,

    #[error("record id {0:?} must be non-empty and free of tabs and line breaks")]
    InvalidId(String),

    #[error("duplicate record id {0:?}")]
    DuplicateId(String),

    #[error("incompatible barcode: {0}")]
    Incompatible(String),

    #[error("nothing to evaluate: {0}")]
    NothingToEvaluate(&'static str),

    #[error("degenerate run for η: {0}")]
    DegenerateRun(String),

    #[error("no decodable images")]
    NoImages,

    #[error("cannot read image {path}: {reason}")]
    ImageRead { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("unsupported index version {found} (reader supports {supported})")]
    IndexVersion { found: String, supported: u32 },

    #[error("truncated index file: {0}")]
    IndexTruncated(String),

    #[error("index checksum mismatch")]
    IndexChecksum,

    #[error("index line {line}: {reason}")]
    IndexLine { line: usize, reason: String },

    #[error("run summary line {line}: {reason}")]
    RunLine { line: usize, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the environment (files, formats) rather
    /// than by the data being evaluated.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::ImageRead { .. }
                | Error::Io { .. }
                | Error::IndexVersion { .. }
                | Error::IndexTruncated(_)
                | Error::IndexChecksum
                | Error::IndexLine { .. }
                | Error::RunLine { .. }
        )
    }
}
