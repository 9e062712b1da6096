//! Binary barcodes for grayscale images.
//!
//! Three encoders turn an image into a fixed-length bit string:
//!
//! * [`radon::encode_rbc`] thresholds Radon projections at the median of
//!   their nonzero values and concatenates the fragments (Radon barcode,
//!   RBC);
//! * [`lbp::encode_lbp`] concatenates raw 3x3 local binary patterns;
//! * [`lbp::encode_lrbp`] applies the same patterns to the sinogram.
//!
//! Barcodes are searched exhaustively by normalized Hamming similarity
//! ([`retrieval`]) and retrieval quality is scored against IRMA codes
//! ([`evaluation`]).

pub mod barcode;
pub mod encoder;
pub mod error;
pub mod evaluation;
pub mod image;
pub mod irma;
pub mod lbp;
pub mod radon;
pub mod report;
pub mod retrieval;
pub mod store;

pub use barcode::{Barcode, EncoderKind, EncoderTag};
pub use encoder::EncoderConfig;
pub use error::{Error, Result};
pub use evaluation::{
    code_error, evaluate_run, suitability, total_error, wrong_digit_rate, EvalOptions, Evaluation,
    Query, RunResult, Suitability,
};
pub use image::{crop_roi, normalize, GrayImage, Roi};
pub use irma::{parse_irma, IrmaCode};
pub use lbp::{encode_lbp, encode_lrbp, lbp_codeword, LbpConfig};
pub use radon::{
    binarize_projection, encode_rbc, radon_projection, radon_transform, resample_projection,
    RbcConfig, Sinogram,
};
pub use retrieval::{hamming_similarity, nearest, top_k, BarcodeIndex, IndexRecord, Match};
pub use store::{build_index, ingest, load_index, save_index, DatasetManifest};
