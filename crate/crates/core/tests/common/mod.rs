//! Test-only oracles and synthetic fixtures.

#![allow(dead_code)]

use radon_barcode::barcode::{Barcode, EncoderKind, EncoderTag};
use radon_barcode::{GrayImage, IrmaCode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, max_side: usize) -> GrayImage {
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    GrayImage::from_fn(w, h, |_, _| rng.random::<f64>()).unwrap()
}

// ---------------------------------------------------------------------------
// Radon oracle: clip each pixel square against each ρ strip and take the
// polygon area. Shares nothing with the trapezoid-CDF path of the library.
// ---------------------------------------------------------------------------

type Pt = (f64, f64);

/// Keeps the part of `poly` where `a·u + b·v <= c`.
fn clip(poly: &[Pt], a: f64, b: f64, c: f64) -> Vec<Pt> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let fp = a * p.0 + b * p.1 - c;
        let fq = a * q.0 + b * q.1 - c;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

fn area(poly: &[Pt]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            p.0 * q.1 - q.0 * p.1
        })
        .sum();
    twice.abs() / 2.0
}

/// Bin count: smallest n covering the diagonal with the parity of the width.
pub fn oracle_bins(w: usize, h: usize) -> usize {
    let mut n = 0usize;
    while ((n * n) as f64) < (w * w + h * h) as f64 {
        n += 1;
    }
    if n % 2 != w % 2 {
        n += 1;
    }
    n
}

pub fn oracle_projection(img: &GrayImage, theta_deg: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let n = oracle_bins(w, h);
    let (c, s) = (theta_deg.to_radians().cos(), theta_deg.to_radians().sin());
    let square = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)];
    let mut out = vec![0.0; n];
    for row in 0..h {
        for col in 0..w {
            let v = img.get(col, row);
            let cx = col as f64 + 0.5 - w as f64 / 2.0;
            let cy = row as f64 + 0.5 - h as f64 / 2.0;
            let rho_c = cx * c + cy * s;
            for (k, bin) in out.iter_mut().enumerate() {
                let lo = k as f64 - n as f64 / 2.0 - rho_c;
                let hi = lo + 1.0;
                // strip lo <= c·u + s·v <= hi in pixel-local coordinates
                let upper = clip(&square, c, s, hi);
                let strip = clip(&upper, -c, -s, -lo);
                *bin += v * area(&strip);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Retrieval oracle: bit-by-bit rescan.
// ---------------------------------------------------------------------------

pub fn rbc_tag(n_p: u32) -> EncoderTag {
    EncoderTag {
        kind: EncoderKind::Rbc,
        n_p: Some(n_p),
    }
}

pub fn random_code(rng: &mut impl Rng, bits: usize, tag: EncoderTag) -> Barcode {
    let v: Vec<bool> = (0..bits).map(|_| rng.random()).collect();
    Barcode::from_bits(&v).unwrap().tagged(tag)
}

/// `(id, similarity)` of the best candidate, ties to the smaller id.
pub fn naive_nearest<'a>(
    query: &Barcode,
    candidates: impl IntoIterator<Item = (&'a str, &'a Barcode)>,
) -> Option<(String, f64)> {
    let q: Vec<bool> = query.bits().collect();
    let mut best: Option<(String, f64)> = None;
    for (id, code) in candidates {
        let same = code.bits().zip(&q).filter(|(a, b)| a == *b).count();
        let sim = same as f64 / q.len() as f64;
        let better = match &best {
            None => true,
            Some((bid, bsim)) => sim > *bsim || (sim == *bsim && id < bid.as_str()),
        };
        if better {
            best = Some((id.to_string(), sim));
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Synthetic shapes corpus.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Disk,
    Bar,
    Square,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Disk, Shape::Bar, Shape::Square];

    pub fn code(self) -> IrmaCode {
        match self {
            Shape::Disk => "1121-120-200-700",
            Shape::Bar => "1121-127-700-500",
            Shape::Square => "112d-121-500-000",
        }
        .parse()
        .unwrap()
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Disk => "disk",
            Shape::Bar => "bar",
            Shape::Square => "square",
        }
    }
}

/// Relative size and position jitter within a class.
const JITTER: f64 = 0.03;

/// A bright shape on an exactly zero background. Only the shape carries
/// noise, uniform up to `noise`: a background pedestal makes every
/// projection bin nonzero and moves the median threshold onto the frame.
pub fn shape_image(rng: &mut impl Rng, shape: Shape, side: usize, noise: f64) -> GrayImage {
    let s = side as f64;
    let cx = s / 2.0 + rng.random_range(-JITTER..JITTER) * s / 2.0;
    let cy = s / 2.0 + rng.random_range(-JITTER..JITTER) * s / 2.0;
    let scale = s * (1.0 + rng.random_range(-JITTER..JITTER));
    let inside: Box<dyn Fn(f64, f64) -> bool> = match shape {
        Shape::Disk => {
            let r = 0.3 * scale;
            Box::new(move |x, y| (x - cx).powi(2) + (y - cy).powi(2) <= r * r)
        }
        Shape::Square => {
            let half = 0.27 * scale;
            Box::new(move |x, y| (x - cx).abs() <= half && (y - cy).abs() <= half)
        }
        Shape::Bar => {
            let phi = rng.random_range(0.0..std::f64::consts::PI);
            let (dx, dy) = (phi.cos(), phi.sin());
            let (half_len, half_w) = (0.4 * scale, 0.08 * scale);
            Box::new(move |x, y| {
                let along = (x - cx) * dx + (y - cy) * dy;
                let across = -(x - cx) * dy + (y - cy) * dx;
                along.abs() <= half_len && across.abs() <= half_w
            })
        }
    };
    GrayImage::from_fn(side, side, |x, y| {
        if inside(x as f64 + 0.5, y as f64 + 0.5) {
            1.0 + noise * rng.random::<f64>()
        } else {
            0.0
        }
    })
    .unwrap()
}

/// `per_class` images of every shape, ids `<shape>_<nn>`.
pub fn shape_corpus(seed: u64, per_class: usize, side: usize) -> Vec<(String, Shape, GrayImage)> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for shape in Shape::ALL {
        for i in 0..per_class {
            let img = shape_image(&mut rng, shape, side, 0.1);
            out.push((format!("{}_{i:02}", shape.name()), shape, img));
        }
    }
    out
}

/// Writes an image as 8-bit grayscale PNG, scaled by its maximum.
pub fn write_png(img: &GrayImage, path: &std::path::Path) {
    let max = img.max().max(f64::MIN_POSITIVE);
    let buf: Vec<u8> = img
        .pixels()
        .iter()
        .map(|v| (v / max * 255.0).round() as u8)
        .collect();
    image::GrayImage::from_raw(img.width() as u32, img.height() as u32, buf)
        .unwrap()
        .save(path)
        .unwrap();
}
