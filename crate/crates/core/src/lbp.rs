//! Local binary pattern barcodes.
//!
//! Codewords are concatenated raw, one byte of bits per interior pixel in
//! row-major order, rather than pooled into histograms.

use crate::barcode::{Barcode, EncoderKind, EncoderTag};
use crate::error::{Error, Result};
use crate::image::{normalize, GrayImage, TIE_TOLERANCE};
use crate::radon::radon_transform;

/// Neighbor offsets, clockwise from the top-left:
///
/// ```text
/// 0 1 2
/// 7 c 3
/// 6 5 4
/// ```
const NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LbpConfig {
    pub normalized_size: usize,
    /// Projection count of the sinogram used by LRBP.
    pub lrbp_n_p: u32,
}

impl Default for LbpConfig {
    fn default() -> Self {
        LbpConfig {
            normalized_size: 32,
            lrbp_n_p: 4,
        }
    }
}

impl LbpConfig {
    pub fn validate(&self) -> Result<()> {
        // Interior pixels only exist from 3x3 upward.
        if self.normalized_size < 3 {
            return Err(Error::InvalidConfig(
                "normalized_size must be at least 3 for LBP".into(),
            ));
        }
        if self.lrbp_n_p < 1 {
            return Err(Error::InvalidConfig("lrbp_n_p must be at least 1".into()));
        }
        Ok(())
    }

    pub fn bit_len(&self) -> usize {
        let inner = self.normalized_size.saturating_sub(2);
        inner * inner * 8
    }
}

/// The 8-bit pattern at interior pixel `(x, y)`; bit `k` is set when
/// neighbor `k` is at least as bright as the center. Values closer than
/// [`TIE_TOLERANCE`] times the image maximum count as equal.
pub fn lbp_codeword(img: &GrayImage, x: usize, y: usize) -> Result<[bool; 8]> {
    if x < 1 || y < 1 || x + 2 > img.width() || y + 2 > img.height() {
        return Err(Error::BorderPixel { x, y });
    }
    Ok(codeword_unchecked(img, x, y, TIE_TOLERANCE * img.max()))
}

#[inline]
fn codeword_unchecked(img: &GrayImage, x: usize, y: usize, tol: f64) -> [bool; 8] {
    let center = img.get(x, y);
    NEIGHBORS.map(|(dx, dy)| {
        img.get(x.wrapping_add_signed(dx), y.wrapping_add_signed(dy)) >= center - tol
    })
}

fn lbp_bits(img: &GrayImage) -> Vec<bool> {
    let (w, h) = (img.width(), img.height());
    let tol = TIE_TOLERANCE * img.max();
    let mut bits = Vec::with_capacity(w.saturating_sub(2) * h.saturating_sub(2) * 8);
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            bits.extend(codeword_unchecked(img, x, y, tol));
        }
    }
    bits
}

pub fn encode_lbp(img: &GrayImage, cfg: &LbpConfig) -> Result<Barcode> {
    cfg.validate()?;
    let norm = normalize(img, cfg.normalized_size)?;
    Ok(Barcode::from_bits(&lbp_bits(&norm))?.tagged(EncoderTag {
        kind: EncoderKind::Lbp,
        n_p: None,
    }))
}

/// LBP over the sinogram: the normalized image is Radon transformed, the
/// sinogram (angles as rows, ρ bins as columns) is resized to the
/// normalized size, and LBP codewords are taken on that grid.
pub fn encode_lrbp(img: &GrayImage, cfg: &LbpConfig) -> Result<Barcode> {
    cfg.validate()?;
    let norm = normalize(img, cfg.normalized_size)?;
    let grid = radon_transform(&norm, cfg.lrbp_n_p)?.to_image()?;
    let grid = normalize(&grid, cfg.normalized_size)?;
    Ok(Barcode::from_bits(&lbp_bits(&grid))?.tagged(EncoderTag {
        kind: EncoderKind::Lrbp,
        n_p: Some(cfg.lrbp_n_p),
    }))
}
