//! Points, rotations and convex-quad predicates.
//!
//! Pixel coordinates are y-down with the origin at the top-left pixel center.
//! Angles are degrees. [`rotate_about`] with a positive angle turns a point
//! counterclockwise as seen on screen; a positive tilt angle therefore means
//! the content of the tilted image appears turned counterclockwise, and every
//! correction operation taking the same angle undoes that tilt.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn cast<U: Real>(self) -> Point2<U> {
        Point2::new(U::of(self.x.as_f64()), U::of(self.y.as_f64()))
    }

    pub fn distance(self, other: Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// `(cos, sin)` of an angle in degrees, snapped to exact values at multiples
/// of 90 degrees so quarter turns are exact.
pub fn cos_sin_deg(degrees: f64) -> (f64, f64) {
    let rad = degrees.to_radians();
    let snap = |v: f64| {
        if v.abs() < 1e-12 {
            0.0
        } else if (v - 1.0).abs() < 1e-12 {
            1.0
        } else if (v + 1.0).abs() < 1e-12 {
            -1.0
        } else {
            v
        }
    };
    (snap(rad.cos()), snap(rad.sin()))
}

/// Rotate `p` about `center` by `degrees`, counterclockwise on screen.
#[inline]
pub fn rotate_about(p: (f64, f64), center: (f64, f64), degrees: f64) -> (f64, f64) {
    let (c, s) = cos_sin_deg(degrees);
    rotate_with(p, center, c, s)
}

#[inline]
pub(crate) fn rotate_with(p: (f64, f64), center: (f64, f64), c: f64, s: f64) -> (f64, f64) {
    let dx = p.0 - center.0;
    let dy = p.1 - center.1;
    (center.0 + c * dx + s * dy, center.1 - s * dx + c * dy)
}

/// Center of a `width`×`height` pixel grid under the pixel-center convention.
pub fn pixel_center(width: usize, height: usize) -> (f64, f64) {
    ((width as f64 - 1.0) * 0.5, (height as f64 - 1.0) * 0.5)
}

/// z-component of `(b - a) × (c - b)`; positive for a y-down "clockwise on
/// screen" turn, which is the orientation of lattice cells listed
/// top-left, top-right, bottom-right, bottom-left.
#[inline]
pub fn turn<T: Real>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> T {
    (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x)
}

/// Minimum triangle area (px²) required at every corner of a valid quad.
pub const MIN_CORNER_AREA: f64 = 1e-6;

/// True if the quad (top-left, top-right, bottom-right, bottom-left) is
/// strictly convex, positively oriented and every corner triangle has area
/// above [`MIN_CORNER_AREA`].
pub fn is_valid_quad<T: Real>(q: &[Point2<T>; 4]) -> bool {
    let min_cross = T::of(2.0 * MIN_CORNER_AREA);
    (0..4).all(|k| {
        let t = turn(q[(k + 3) % 4], q[k], q[(k + 1) % 4]);
        t > min_cross
    })
}

/// Signed distance-like containment test for a convex quad in lattice order.
/// Returns the minimum edge cross product; non-negative means inside or on
/// the boundary.
pub(crate) fn quad_containment(q: &[Point2<f64>; 4], p: Point2<f64>) -> f64 {
    (0..4)
        .map(|k| {
            let a = q[k];
            let b = q[(k + 1) % 4];
            let len = a.distance(b).max(f64::MIN_POSITIVE);
            turn(a, b, p) / len
        })
        .fold(f64::INFINITY, f64::min)
}
