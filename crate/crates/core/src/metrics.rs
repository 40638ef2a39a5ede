//! Reference-based image quality (PSNR, SSIM) and flow endpoint error.
//!
//! Means use pairwise summation in `f64`, so results do not depend on
//! evaluation order.

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::image::{Image, Samples};
use crate::scalar::Real;

pub const PSNR_CAP_DB: f64 = 100.0;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;
const PEAK: f64 = 255.0;

/// Sum by recursive halving; blocks of up to 8 are summed sequentially.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn pairwise_mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(v) / v.len() as f64
}

/// Samples on the 0..=255 scale.
fn scaled(img: &Image) -> Vec<f64> {
    match img.samples() {
        Samples::U8(d) => d.iter().map(|&v| v as f64).collect(),
        Samples::Unit(d) => d.iter().map(|&v| v as f64 * PEAK).collect(),
    }
}

/// `10·log10(255² / MSE)` over all channels, capped at 100 dB.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    a.same_dims(b)?;
    let (x, y) = (scaled(a), scaled(b));
    let sq: Vec<f64> = x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).collect();
    let mse = pairwise_mean(&sq);
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (PEAK * PEAK / mse).log10()).min(PSNR_CAP_DB))
}

/// BT.601 luma on the 0..=255 scale; single-channel images pass through.
fn luma(img: &Image) -> Vec<f64> {
    let s = scaled(img);
    match img.channels() {
        1 => s,
        _ => s
            .chunks_exact(3)
            .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
            .collect(),
    }
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let r = (SSIM_WINDOW / 2) as f64;
    let mut k: [f64; SSIM_WINDOW] =
        std::array::from_fn(|i| (-((i as f64 - r).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// Separable valid-region filter of a `w`×`h` plane.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = k.iter().zip(&row[x..]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k
                .iter()
                .enumerate()
                .map(|(i, a)| a * tmp[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean SSIM over all fully covered 11×11 Gaussian windows (σ = 1.5,
/// K1 = 0.01, K2 = 0.03, L = 255), on luma for color images.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    a.same_dims(b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {w}x{h}"
        )));
    }
    let (x, y) = (luma(a), luma(b));
    let k = gaussian_window();
    let prod = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(s, t)| s * t).collect::<Vec<_>>();
    let mx = filter_valid(&x, w, h, &k);
    let my = filter_valid(&y, w, h, &k);
    let mxx = filter_valid(&prod(&x, &x), w, h, &k);
    let myy = filter_valid(&prod(&y, &y), w, h, &k);
    let mxy = filter_valid(&prod(&x, &y), w, h, &k);
    let c1 = (K1 * PEAK).powi(2);
    let c2 = (K2 * PEAK).powi(2);
    let map: Vec<f64> = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = mxx[i] - ux * ux;
            let vy = myy[i] - uy * uy;
            let cxy = mxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .collect();
    Ok(pairwise_mean(&map))
}

/// Mean and max Euclidean distance between corresponding flow vectors.
pub fn endpoint_error<T: Real>(f: &FlowField<T>, g: &FlowField<T>) -> Result<(f64, f64)> {
    f.same_dims(g)?;
    let d: Vec<f64> = f
        .u()
        .iter()
        .zip(f.v())
        .zip(g.u().iter().zip(g.v()))
        .map(|((&a, &b), (&c, &e))| (a.as_f64() - c.as_f64()).hypot(b.as_f64() - e.as_f64()))
        .collect();
    let max = d.iter().copied().fold(0.0, f64::max);
    Ok((pairwise_mean(&d), max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
    pub n_images: usize,
}

impl MetricReport {
    /// Arithmetic means of per-image `(psnr, ssim)` pairs.
    pub fn from_pairs(rows: &[(f64, f64)]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("no images to report".into()));
        }
        let p: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let s: Vec<f64> = rows.iter().map(|r| r.1).collect();
        Ok(Self {
            psnr_db: pairwise_mean(&p),
            ssim: pairwise_mean(&s),
            n_images: rows.len(),
        })
    }
}
