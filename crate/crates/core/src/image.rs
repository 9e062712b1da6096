//! Grayscale images, normalization and region cropping.

use crate::error::{Error, Result};

/// Relative size below which two values compare as equal in the encoders'
/// thresholds, so that ties survive rounding in rescaled inputs.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Luma weights applied to red, green and blue when ingesting color images.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Row-major grid of non-negative intensities.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "zero-area image {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidImage(format!("intensity {v} is not a finite value >= 0")));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a gray image from interleaved RGB samples using [`LUMA_WEIGHTS`].
    pub fn from_rgb(width: usize, height: usize, rgb: &[f64]) -> Result<Self> {
        if rgb.len() != 3 * width * height {
            return Err(Error::InvalidImage(format!(
                "{} samples for a {width}x{height} RGB image",
                rgb.len()
            )));
        }
        let pixels = rgb
            .chunks_exact(3)
            .map(|p| LUMA_WEIGHTS[0] * p[0] + LUMA_WEIGHTS[1] * p[1] + LUMA_WEIGHTS[2] * p[2])
            .collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.pixels.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.pixels.iter().sum()
    }

    /// Multiplies every intensity by `c`, which must be positive.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidImage(format!("scale {c} must be positive")));
        }
        Self::new(
            self.width,
            self.height,
            self.pixels.iter().map(|v| v * c).collect(),
        )
    }

    pub fn flipped_horizontally(&self) -> Self {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks_exact(self.width) {
            pixels.extend(row.iter().rev());
        }
        GrayImage { pixels, ..*self }
    }

    /// Resamples to `width` x `height`. Each axis is shrunk by area averaging
    /// or enlarged by linear interpolation between pixel centers.
    pub fn resize(&self, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "cannot resize to {width}x{height}"
            )));
        }
        let wx = axis_weights(self.width, width);
        let wy = axis_weights(self.height, height);

        // Horizontal pass, then vertical.
        let mut tmp = Vec::with_capacity(width * self.height);
        for row in self.pixels.chunks_exact(self.width) {
            tmp.extend(wx.iter().map(|taps| apply_taps(taps, |i| row[i])));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for taps in &wy {
            for x in 0..width {
                pixels.push(apply_taps(taps, |y| tmp[y * width + x]));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn crop(&self, roi: Roi) -> Result<Self> {
        let Roi { x, y, w, h } = roi;
        let fits = w >= 1
            && h >= 1
            && x.checked_add(w).is_some_and(|r| r <= self.width)
            && y.checked_add(h).is_some_and(|b| b <= self.height);
        if !fits {
            return Err(Error::RoiOutOfBounds {
                x,
                y,
                w,
                h,
                width: self.width,
                height: self.height,
            });
        }
        let mut pixels = Vec::with_capacity(w * h);
        for row in y..y + h {
            let start = row * self.width + x;
            pixels.extend_from_slice(&self.pixels[start..start + w]);
        }
        Self::new(w, h, pixels)
    }
}

/// Rectangular region of interest in pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Roi {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// Resizes to `size` x `size` and rescales intensities into [0, 1] by the
/// maximum. An all-zero image stays all zero.
pub fn normalize(img: &GrayImage, size: usize) -> Result<GrayImage> {
    if size < 2 {
        return Err(Error::InvalidConfig(format!(
            "normalized size {size} must be at least 2"
        )));
    }
    let mut out = img.resize(size, size)?;
    let max = out.max();
    if max > 0.0 {
        out.pixels.iter_mut().for_each(|v| *v /= max);
    }
    Ok(out)
}

pub fn crop_roi(img: &GrayImage, roi: Roi) -> Result<GrayImage> {
    img.crop(roi)
}

type Taps = Vec<(usize, f64)>;

fn axis_weights(src: usize, dst: usize) -> Vec<Taps> {
    if dst < src {
        area_weights(src, dst)
    } else {
        linear_weights(src, dst)
    }
}

fn area_weights(src: usize, dst: usize) -> Vec<Taps> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|j| {
            let lo = j as f64 * scale;
            let hi = (j + 1) as f64 * scale;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(src);
            (first..last)
                .filter_map(|i| {
                    let overlap = (hi.min((i + 1) as f64) - lo.max(i as f64)).max(0.0);
                    (overlap > 0.0).then_some((i, overlap / scale))
                })
                .collect()
        })
        .collect()
}

fn linear_weights(src: usize, dst: usize) -> Vec<Taps> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|j| {
            let pos = ((j as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = pos.floor() as usize;
            let t = pos - i0 as f64;
            if t == 0.0 || i0 + 1 >= src {
                vec![(i0, 1.0)]
            } else {
                vec![(i0, 1.0 - t), (i0 + 1, t)]
            }
        })
        .collect()
}

/// Weighted sum written relative to the first tap, so that constant runs of
/// input reproduce the constant exactly.
#[inline]
fn apply_taps(taps: &[(usize, f64)], value: impl Fn(usize) -> f64) -> f64 {
    let base = value(taps[0].0);
    base + taps
        .iter()
        .skip(1)
        .map(|&(i, w)| w * (value(i) - base))
        .sum::<f64>()
}
