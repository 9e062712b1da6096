//! Discrete Radon projections and Radon barcodes.
//!
//! Geometry: the origin is the image center, `x` grows to the right and `y`
//! grows downward (row order), and a projection at angle θ bins the value
//! `ρ = x cos θ + y sin θ`. At θ = 0 the rays are vertical, so the bins hold
//! column sums; at θ = 90 they hold row sums, top to bottom.
//!
//! Each pixel is treated as a unit square of constant intensity. Its mass
//! spreads over ρ as the convolution of two boxes of widths `|cos θ|` and
//! `|sin θ|` (a trapezoid), and every bin receives the exact integral of that
//! trapezoid over its one-pixel-wide interval. Bins cover the image diagonal,
//! so projections conserve mass.

use crate::barcode::{Barcode, EncoderKind, EncoderTag};
use crate::error::{Error, Result};
use crate::image::{normalize, GrayImage, TIE_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RbcConfig {
    /// Number of projection angles, evenly spaced over [0, 180).
    pub n_p: u32,
    /// Side length of the square the input is resized to.
    pub normalized_size: usize,
    /// Every projection is resampled to this many values before thresholding.
    pub bins_per_angle: usize,
}

impl RbcConfig {
    pub fn new(n_p: u32) -> Self {
        RbcConfig {
            n_p,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_p < 1 {
            return Err(Error::InvalidConfig("n_p must be at least 1".into()));
        }
        if self.normalized_size < 2 {
            return Err(Error::InvalidConfig(
                "normalized_size must be at least 2".into(),
            ));
        }
        if self.bins_per_angle < 1 {
            return Err(Error::InvalidConfig(
                "bins_per_angle must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn bit_len(&self) -> usize {
        self.n_p as usize * self.bins_per_angle
    }
}

impl Default for RbcConfig {
    fn default() -> Self {
        RbcConfig {
            n_p: 8,
            normalized_size: 32,
            bins_per_angle: 128,
        }
    }
}

/// One projection per angle.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    pub angles: Vec<f64>,
    pub projections: Vec<Vec<f64>>,
}

impl Sinogram {
    /// The sinogram as an image: one row per angle, one column per ρ bin.
    pub fn to_image(&self) -> Result<GrayImage> {
        let cols = self.projections.first().map_or(0, Vec::len);
        let pixels = self.projections.iter().flatten().copied().collect();
        GrayImage::new(cols, self.projections.len(), pixels)
    }
}

/// The angles θ_k = k · 180 / n_p, in degrees.
pub fn projection_angles(n_p: u32) -> Vec<f64> {
    (0..n_p).map(|k| k as f64 * 180.0 / n_p as f64).collect()
}

/// Number of one-pixel ρ bins for a `width` x `height` image: the smallest
/// count covering the diagonal whose parity matches `width`, so that bin
/// edges line up with pixel edges at θ = 0.
pub fn projection_len(width: usize, height: usize) -> usize {
    let diag = ((width * width + height * height) as f64).sqrt();
    let mut n = diag.ceil() as usize;
    if n % 2 != width % 2 {
        n += 1;
    }
    n
}

fn direction(theta: f64) -> (f64, f64) {
    if theta == 0.0 {
        (1.0, 0.0)
    } else if theta == 90.0 {
        (0.0, 1.0)
    } else {
        let r = theta.to_radians();
        (r.cos(), r.sin())
    }
}

/// CDF of the sum of two centered uniforms with widths `a <= b`.
#[derive(Clone, Copy)]
struct Footprint {
    a: f64,
    b: f64,
    half: f64,
    flat: f64,
}

impl Footprint {
    fn new(c: f64, s: f64) -> Self {
        let (a, b) = if c.abs() <= s.abs() {
            (c.abs(), s.abs())
        } else {
            (s.abs(), c.abs())
        };
        Footprint {
            a,
            b,
            half: (a + b) / 2.0,
            flat: (b - a) / 2.0,
        }
    }

    fn cdf(&self, t: f64) -> f64 {
        if t <= -self.half {
            0.0
        } else if t >= self.half {
            1.0
        } else if t < -self.flat {
            let u = t + self.half;
            u * u / (2.0 * self.a * self.b)
        } else if t <= self.flat {
            self.a / (2.0 * self.b) + (t + self.flat) / self.b
        } else {
            let u = self.half - t;
            1.0 - u * u / (2.0 * self.a * self.b)
        }
    }

    /// Mass within `[lo, hi]`, evaluated on the near tail to avoid
    /// cancellation for small slivers.
    fn mass(&self, lo: f64, hi: f64) -> f64 {
        if lo + hi > 0.0 {
            self.cdf(-lo) - self.cdf(-hi)
        } else {
            self.cdf(hi) - self.cdf(lo)
        }
    }
}

/// Line-integral projection of `img` at `theta` degrees onto
/// [`projection_len`] bins centered on the image center.
pub fn radon_projection(img: &GrayImage, theta: f64) -> Result<Vec<f64>> {
    if !(0.0..180.0).contains(&theta) {
        return Err(Error::AngleOutOfRange(theta));
    }
    let (w, h) = (img.width(), img.height());
    let n = projection_len(w, h);
    let offset = n as f64 / 2.0;
    let (c, s) = direction(theta);
    let fp = Footprint::new(c, s);

    let mut out = vec![0.0; n];
    for row in 0..h {
        let y = row as f64 + 0.5 - h as f64 / 2.0;
        for col in 0..w {
            let v = img.get(col, row);
            if v == 0.0 {
                continue;
            }
            let x = col as f64 + 0.5 - w as f64 / 2.0;
            // ρ of the pixel center, shifted so bin k spans [k, k + 1).
            let center = x * c + y * s + offset;
            let first = ((center - fp.half).floor().max(0.0)) as usize;
            let last = ((center + fp.half).ceil() as usize).min(n);
            for (k, bin) in out.iter_mut().enumerate().take(last).skip(first) {
                let lo = k as f64 - center;
                let m = fp.mass(lo, lo + 1.0);
                if m > 0.0 {
                    *bin += v * m;
                }
            }
        }
    }
    Ok(out)
}

pub fn radon_transform(img: &GrayImage, n_p: u32) -> Result<Sinogram> {
    if n_p < 1 {
        return Err(Error::InvalidConfig("n_p must be at least 1".into()));
    }
    let angles = projection_angles(n_p);
    let projections = angles
        .iter()
        .map(|&theta| radon_projection(img, theta))
        .collect::<Result<_>>()?;
    Ok(Sinogram {
        angles,
        projections,
    })
}

/// Linear resampling of `p` to `bins` values; the first and last samples
/// map onto the first and last inputs.
pub fn resample_projection(p: &[f64], bins: usize) -> Vec<f64> {
    if p.is_empty() || bins == 0 {
        return Vec::new();
    }
    let last = (p.len() - 1) as f64;
    (0..bins)
        .map(|i| {
            let pos = if bins == 1 {
                last / 2.0
            } else {
                i as f64 * last / (bins - 1) as f64
            };
            let i0 = pos.floor() as usize;
            let t = pos - i0 as f64;
            if t == 0.0 || i0 + 1 >= p.len() {
                p[i0.min(p.len() - 1)]
            } else {
                p[i0] + t * (p[i0 + 1] - p[i0])
            }
        })
        .collect()
}

/// Median of a non-empty slice; the mean of the two middle values for even
/// counts.
pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Thresholds a projection at the median of its nonzero entries,
/// inclusively. An all-zero projection yields all zeros. Differences below
/// [`TIE_TOLERANCE`] times the largest entry are rounding, not signal: such
/// entries count as zero, or as equal to the median.
pub fn binarize_projection(p: &[f64]) -> Vec<bool> {
    let tol = TIE_TOLERANCE * p.iter().fold(0.0, |m, v| v.abs().max(m));
    let mut nonzero: Vec<f64> = p.iter().copied().filter(|v| v.abs() > tol).collect();
    if nonzero.is_empty() {
        return vec![false; p.len()];
    }
    let threshold = median(&mut nonzero);
    p.iter().map(|&v| v >= threshold - tol).collect()
}

/// Radon barcode: normalize, project at `n_p` angles, resample each
/// projection, threshold, and concatenate in angle order.
pub fn encode_rbc(img: &GrayImage, cfg: &RbcConfig) -> Result<Barcode> {
    cfg.validate()?;
    let norm = normalize(img, cfg.normalized_size)?;
    let sinogram = radon_transform(&norm, cfg.n_p)?;
    let mut bits = Vec::with_capacity(cfg.bit_len());
    for p in &sinogram.projections {
        bits.extend(binarize_projection(&resample_projection(
            p,
            cfg.bins_per_angle,
        )));
    }
    Ok(Barcode::from_bits(&bits)?.tagged(EncoderTag {
        kind: EncoderKind::Rbc,
        n_p: Some(cfg.n_p),
    }))
}
