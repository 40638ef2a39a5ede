//! Raster images, PNG/JPEG codecs and the resampling primitives shared by the
//! warping code.
//!
//! Samples are row-major and channel-interleaved. Pixel `(x, y)` is column `x`,
//! row `y`, origin top-left, and its center sits at integer coordinates.
//! Warping math runs on the unit-interval representation; 8-bit images are
//! converted at the boundary.

use std::borrow::Cow;
use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    U8(Vec<u8>),
    /// Every value lies in `[0, 1]`.
    Unit(Vec<f32>),
}

impl Samples {
    fn len(&self) -> usize {
        match self {
            Samples::U8(d) => d.len(),
            Samples::Unit(d) => d.len(),
        }
    }
}

/// An immutable `width`×`height` image with 1 or 3 channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    samples: Samples,
}

/// 8-bit quantization: multiply by 255, round half away from zero, clamp.
#[inline]
pub fn quantize(v: f32) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, samples: Samples) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { what: "image" });
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidArgument(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        if samples.len() != width * height * channels {
            return Err(Error::InvalidArgument(format!(
                "sample buffer holds {} values, expected {}",
                samples.len(),
                width * height * channels
            )));
        }
        if let Samples::Unit(d) = &samples {
            if let Some(bad) = d.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidArgument(format!(
                    "unit-interval sample out of range: {bad}"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn from_u8(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, channels, Samples::U8(data))
    }

    pub fn from_unit(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        Self::new(width, height, channels, Samples::Unit(data))
    }

    /// Unit-interval image built from a per-pixel closure returning channel values.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c).clamp(0.0, 1.0));
                }
            }
        }
        Self::from_unit(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.samples, Samples::Unit(_))
    }

    /// Channel value at `(x, y)` as a unit-interval real.
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        let idx = (y * self.width + x) * self.channels + c;
        match &self.samples {
            Samples::U8(d) => d[idx] as f32 / 255.0,
            Samples::Unit(d) => d[idx],
        }
    }

    /// Unit-interval view of the samples, converting 8-bit data if needed.
    pub fn unit_data(&self) -> Cow<'_, [f32]> {
        match &self.samples {
            Samples::Unit(d) => Cow::Borrowed(d),
            Samples::U8(d) => Cow::Owned(d.iter().map(|&v| v as f32 / 255.0).collect()),
        }
    }

    /// 8-bit view of the samples, quantizing unit-interval data if needed.
    pub fn u8_data(&self) -> Cow<'_, [u8]> {
        match &self.samples {
            Samples::U8(d) => Cow::Borrowed(d),
            Samples::Unit(d) => Cow::Owned(d.iter().map(|&v| quantize(v)).collect()),
        }
    }

    pub fn to_unit(&self) -> Image {
        self.with_samples(Samples::Unit(self.unit_data().into_owned()))
    }

    pub fn to_u8(&self) -> Image {
        self.with_samples(Samples::U8(self.u8_data().into_owned()))
    }

    fn with_samples(&self, samples: Samples) -> Image {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            samples,
        }
    }

    /// Sub-rectangle copy; same representation as `self`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Image> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { what: "crop" });
        }
        if x0 + width > self.width || y0 + height > self.height {
            return Err(Error::InvalidArgument(format!(
                "crop {width}x{height}+{x0}+{y0} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let c = self.channels;
        let rows = y0..y0 + height;
        let span = |y: usize| (y * self.width + x0) * c..(y * self.width + x0 + width) * c;
        let samples = match &self.samples {
            Samples::U8(d) => Samples::U8(rows.flat_map(|y| d[span(y)].to_vec()).collect()),
            Samples::Unit(d) => Samples::Unit(rows.flat_map(|y| d[span(y)].to_vec()).collect()),
        };
        Image::new(width, height, c, samples)
    }

    /// Centered crop keeping `fraction` of each dimension.
    pub fn central_crop(&self, fraction: f64) -> Result<Image> {
        let w = ((self.width as f64 * fraction).round() as usize).clamp(1, self.width);
        let h = ((self.height as f64 * fraction).round() as usize).clamp(1, self.height);
        self.crop((self.width - w) / 2, (self.height - h) / 2, w, h)
    }

    pub fn same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }
}

fn from_dynamic(img: DynamicImage) -> Result<Image> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::ZeroDimension { what: "image" });
    }
    if img.color().has_color() {
        Image::from_u8(w, h, 3, img.to_rgb8().into_raw())
    } else {
        Image::from_u8(w, h, 1, img.to_luma8().into_raw())
    }
}

/// Decode PNG or JPEG bytes into an 8-bit image (3 channels for color input,
/// 1 for grayscale). Alpha is dropped.
pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    let format =
        image::guess_format(bytes).map_err(|e| Error::UnsupportedFormat(e.to_string()))?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Jpeg) {
        return Err(Error::UnsupportedFormat(format!("{format:?}")));
    }
    let img = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::Decode(e.to_string()))?;
    from_dynamic(img)
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

/// PNG-encode; unit-interval images are quantized with [`quantize`].
pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let color = if img.channels == 3 {
        image::ExtendedColorType::Rgb8
    } else {
        image::ExtendedColorType::L8
    };
    let mut out = Cursor::new(Vec::new());
    image::write_buffer_with_format(
        &mut out,
        &img.u8_data(),
        img.width as u32,
        img.height as u32,
        color,
        ImageFormat::Png,
    )
    .map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out.into_inner())
}

pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(img)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Left-right mirror: `out(x, y) = in(width - 1 - x, y)`.
pub fn mirror_lr(img: &Image) -> Image {
    fn flip<S: Copy>(d: &[S], w: usize, c: usize) -> Vec<S> {
        let mut out = Vec::with_capacity(d.len());
        for row in d.chunks_exact(w * c) {
            for px in row.chunks_exact(c).rev() {
                out.extend_from_slice(px);
            }
        }
        out
    }
    let samples = match &img.samples {
        Samples::U8(d) => Samples::U8(flip(d, img.width, img.channels)),
        Samples::Unit(d) => Samples::Unit(flip(d, img.width, img.channels)),
    };
    img.with_samples(samples)
}

/// Source tap for one output coordinate of an align-corners-false resize.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tap {
    pub i0: usize,
    pub i1: usize,
    pub t: f64,
}

/// Sample positions `(i + 0.5) * src/dst - 0.5`, clamped to the source range.
pub(crate) fn resize_taps(src: usize, dst: usize) -> Vec<Tap> {
    let ratio = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let pos = ((i as f64 + 0.5) * ratio - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = pos.floor() as usize;
            let i1 = (i0 + 1).min(src - 1);
            Tap {
                i0,
                i1,
                t: pos - i0 as f64,
            }
        })
        .collect()
}

#[inline]
fn lerp(a: f32, b: f32, t: f32) -> f32 {
    a + (b - a) * t
}

/// Resize one interleaved plane set with the align-corners-false bilinear rule.
pub(crate) fn resize_plane(
    src: &[f32],
    width: usize,
    height: usize,
    channels: usize,
    new_width: usize,
    new_height: usize,
) -> Vec<f32> {
    let xt = resize_taps(width, new_width);
    let yt = resize_taps(height, new_height);
    let mut out = vec![0.0f32; new_width * new_height * channels];
    out.par_chunks_mut(new_width * channels)
        .zip(yt.par_iter())
        .for_each(|(row, ty)| {
            let r0 = &src[ty.i0 * width * channels..(ty.i0 + 1) * width * channels];
            let r1 = &src[ty.i1 * width * channels..(ty.i1 + 1) * width * channels];
            for (px, tx) in row.chunks_exact_mut(channels).zip(&xt) {
                for (c, o) in px.iter_mut().enumerate() {
                    let a = lerp(r0[tx.i0 * channels + c], r0[tx.i1 * channels + c], tx.t as f32);
                    let b = lerp(r1[tx.i0 * channels + c], r1[tx.i1 * channels + c], tx.t as f32);
                    *o = lerp(a, b, ty.t as f32);
                }
            }
        });
    out
}

/// Bilinear resize (align-corners-false). The result is unit-interval; a
/// same-size resize reproduces the input values exactly.
pub fn resize_bilinear(img: &Image, new_width: usize, new_height: usize) -> Result<Image> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::ZeroDimension {
            what: "resize target",
        });
    }
    let src = img.unit_data();
    let mut out = resize_plane(
        &src,
        img.width,
        img.height,
        img.channels,
        new_width,
        new_height,
    );
    for v in &mut out {
        *v = v.clamp(0.0, 1.0);
    }
    Image::from_unit(new_width, new_height, img.channels, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize, c: usize) -> Image {
        let data = (0..w * h * c).map(|i| (i * 37 % 256) as u8).collect();
        Image::from_u8(w, h, c, data).unwrap()
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(
            Image::from_u8(0, 3, 1, vec![]),
            Err(Error::ZeroDimension { .. })
        ));
        assert!(Image::from_u8(2, 2, 1, vec![0; 3]).is_err());
        assert!(Image::from_u8(2, 2, 2, vec![0; 8]).is_err());
        assert!(Image::from_unit(1, 1, 1, vec![1.5]).is_err());
    }

    #[test]
    fn mirror_two_pixels() {
        let img = Image::from_u8(2, 1, 1, vec![10, 20]).unwrap();
        let m = mirror_lr(&img);
        assert_eq!(m.u8_data().as_ref(), &[20, 10]);
    }

    #[test]
    fn mirror_is_involution_and_fixes_symmetric_images() {
        let img = ramp(7, 5, 3);
        assert_eq!(mirror_lr(&mirror_lr(&img)), img);
        let sym = Image::from_u8(3, 1, 3, vec![1, 2, 3, 9, 9, 9, 1, 2, 3]).unwrap();
        assert_eq!(mirror_lr(&sym), sym);
    }

    #[test]
    fn resize_same_size_is_identity() {
        let img = ramp(9, 6, 3);
        let r = resize_bilinear(&img, 9, 6).unwrap();
        assert_eq!(r.to_u8(), img);
    }

    #[test]
    fn resize_preserves_constants() {
        let img = Image::from_unit(13, 7, 1, vec![0.3; 91]).unwrap();
        let r = resize_bilinear(&img, 5, 19).unwrap();
        assert!(r.unit_data().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn resize_zero_target_fails() {
        assert!(resize_bilinear(&ramp(4, 4, 1), 0, 3).is_err());
    }

    #[test]
    fn quantization_rounds_half_away_from_zero() {
        assert_eq!(quantize(0.5 / 255.0), 1);
        assert_eq!(quantize(0.49 / 255.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(-0.2), 0);
        assert_eq!(quantize(1.7), 255);
    }

    #[test]
    fn central_crop_dimensions() {
        let img = ramp(100, 50, 1);
        let c = img.central_crop(0.6).unwrap();
        assert_eq!((c.width(), c.height()), (60, 30));
        assert_eq!(c.get(0, 0, 0), img.get(20, 10, 0));
    }
}
