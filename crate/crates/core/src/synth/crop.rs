use crate::error::{Error, Result};
use crate::geometry::cos_sin_deg;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// Largest axis-aligned rectangle with the frame's aspect ratio that fits
/// inside a `width`×`height` frame rotated by `degrees` about its center,
/// in frame coordinates.
///
/// The valid region is centrally symmetric and convex, so the optimum is
/// centered; its scale is limited by the two corner constraints
/// `k <= W / (W|cos| + H|sin|)` and `k <= H / (W|sin| + H|cos|)`.
pub fn max_inscribed_crop(width: usize, height: usize, degrees: f64) -> Result<Rect> {
    if width == 0 || height == 0 {
        return Err(Error::DegenerateGeometry(format!("frame {width}x{height}")));
    }
    if !(degrees.abs() <= 45.0) {
        return Err(Error::DegenerateGeometry(format!(
            "crop angle must satisfy |theta| <= 45, got {degrees}"
        )));
    }
    let (c, s) = cos_sin_deg(degrees);
    let (c, s) = (c.abs(), s.abs());
    let (w, h) = (width as f64, height as f64);
    let k = (w / (w * c + h * s)).min(h / (w * s + h * c)).min(1.0);
    let (cw, ch) = (k * w, k * h);
    Ok(Rect {
        x: (w - cw) / 2.0,
        y: (h - ch) / 2.0,
        width: cw,
        height: ch,
    })
}
