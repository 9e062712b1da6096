use crate::barcode::{Barcode, EncoderKind, EncoderTag};
use crate::error::Result;
use crate::image::GrayImage;
use crate::lbp::{encode_lbp, encode_lrbp, LbpConfig};
use crate::radon::{encode_rbc, RbcConfig};

/// An encoder together with its full configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncoderConfig {
    Rbc(RbcConfig),
    Lbp(LbpConfig),
    Lrbp(LbpConfig),
}

impl EncoderConfig {
    pub fn encode(&self, img: &GrayImage) -> Result<Barcode> {
        match self {
            EncoderConfig::Rbc(c) => encode_rbc(img, c),
            EncoderConfig::Lbp(c) => encode_lbp(img, c),
            EncoderConfig::Lrbp(c) => encode_lrbp(img, c),
        }
    }

    /// The same encoder with fields it does not use reset to defaults, so
    /// that configs compare equal exactly when they encode identically.
    pub fn canonical(&self) -> Self {
        match *self {
            EncoderConfig::Lbp(c) => EncoderConfig::Lbp(LbpConfig {
                lrbp_n_p: LbpConfig::default().lrbp_n_p,
                ..c
            }),
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EncoderConfig::Rbc(c) => c.validate(),
            EncoderConfig::Lbp(c) | EncoderConfig::Lrbp(c) => c.validate(),
        }
    }

    pub fn kind(&self) -> EncoderKind {
        match self {
            EncoderConfig::Rbc(_) => EncoderKind::Rbc,
            EncoderConfig::Lbp(_) => EncoderKind::Lbp,
            EncoderConfig::Lrbp(_) => EncoderKind::Lrbp,
        }
    }

    pub fn tag(&self) -> EncoderTag {
        EncoderTag {
            kind: self.kind(),
            n_p: self.n_p(),
        }
    }

    pub fn n_p(&self) -> Option<u32> {
        match self {
            EncoderConfig::Rbc(c) => Some(c.n_p),
            EncoderConfig::Lbp(_) => None,
            EncoderConfig::Lrbp(c) => Some(c.lrbp_n_p),
        }
    }

    pub fn normalized_size(&self) -> usize {
        match self {
            EncoderConfig::Rbc(c) => c.normalized_size,
            EncoderConfig::Lbp(c) | EncoderConfig::Lrbp(c) => c.normalized_size,
        }
    }

    /// Per-angle fragment length; only Radon barcodes have one.
    pub fn bins_per_angle(&self) -> Option<usize> {
        match self {
            EncoderConfig::Rbc(c) => Some(c.bins_per_angle),
            _ => None,
        }
    }

    pub fn bit_len(&self) -> usize {
        match self {
            EncoderConfig::Rbc(c) => c.bit_len(),
            EncoderConfig::Lbp(c) | EncoderConfig::Lrbp(c) => c.bit_len(),
        }
    }

    pub fn method_name(&self) -> String {
        self.tag().method_name()
    }
}
