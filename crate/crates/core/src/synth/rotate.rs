use crate::error::{Error, Result};
use crate::geometry::{cos_sin_deg, pixel_center, rotate_with};
use crate::image::Image;
use crate::warp::{render, snap, Boundary};

const EXTENT_TOL: f64 = 1e-9;

/// Size of the axis-aligned box holding a `width`×`height` frame rotated by
/// `degrees`.
pub fn rotated_extent(width: usize, height: usize, degrees: f64) -> (usize, usize) {
    let (c, s) = cos_sin_deg(degrees);
    let (c, s) = (c.abs(), s.abs());
    let (w, h) = (width as f64, height as f64);
    let round_up = |v: f64| (v - EXTENT_TOL).ceil().max(1.0) as usize;
    (round_up(w * c + h * s), round_up(w * s + h * c))
}

/// Rigidly rotate an image tilted by `degrees` back to level onto its
/// rotated bounding box. Returns the image and a single-channel mask that is
/// 255 where the output sampled inside the source and 0 elsewhere.
pub fn rigid_rotate(img: &Image, degrees: f64) -> Result<(Image, Image)> {
    if !(degrees.abs() <= 90.0) {
        return Err(Error::InvalidArgument(format!(
            "rotation angle must satisfy |theta| <= 90, got {degrees}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let (ow, oh) = rotated_extent(w, h, degrees);
    let src_c = pixel_center(w, h);
    let out_c = pixel_center(ow, oh);
    let (c, s) = cos_sin_deg(degrees);
    let source = |x: usize, y: usize| {
        let p = (
            x as f64 - out_c.0 + src_c.0,
            y as f64 - out_c.1 + src_c.1,
        );
        rotate_with(p, src_c, c, s)
    };

    let out = render(img, ow, oh, Boundary::Constant(0.0), |x, y| {
        let (sx, sy) = source(x, y);
        (snap(sx), snap(sy))
    })?;
    let (lim_x, lim_y) = ((w - 1) as f64 + EXTENT_TOL, (h - 1) as f64 + EXTENT_TOL);
    let mut mask = vec![0u8; ow * oh];
    for (i, m) in mask.iter_mut().enumerate() {
        let (sx, sy) = source(i % ow, i / ow);
        if sx >= -EXTENT_TOL && sy >= -EXTENT_TOL && sx <= lim_x && sy <= lim_y {
            *m = 255;
        }
    }
    Ok((out, Image::from_u8(ow, oh, 1, mask)?))
}
