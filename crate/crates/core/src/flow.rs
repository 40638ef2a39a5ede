//! Dense backward displacement fields.
//!
//! `u(x, y)` / `v(x, y)` give the horizontal / vertical offset from output
//! pixel `(x, y)` to the input position it samples.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry;
use crate::image::resize_taps;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowField<T> {
    width: usize,
    height: usize,
    u: Vec<T>,
    v: Vec<T>,
}

impl<T: Real> FlowField<T> {
    pub fn new(width: usize, height: usize, u: Vec<T>, v: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { what: "flow field" });
        }
        let n = width * height;
        if u.len() != n || v.len() != n {
            return Err(Error::InvalidArgument(format!(
                "flow planes hold {}/{} values, expected {n}",
                u.len(),
                v.len()
            )));
        }
        let flow = Self { width, height, u, v };
        if let Some((x, y)) = flow.first_non_finite() {
            return Err(Error::NonFiniteFlow { x, y });
        }
        Ok(flow)
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::constant(width, height, T::zero(), T::zero())
    }

    pub fn constant(width: usize, height: usize, u: T, v: T) -> Result<Self> {
        Self::new(width, height, vec![u; width * height], vec![v; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> (T, T)) -> Result<Self> {
        let mut u = Vec::with_capacity(width * height);
        let mut v = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let (a, b) = f(x, y);
                u.push(a);
                v.push(b);
            }
        }
        Self::new(width, height, u, v)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn u(&self) -> &[T] {
        &self.u
    }

    pub fn v(&self) -> &[T] {
        &self.v
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (T, T) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.u
            .iter()
            .zip(&self.v)
            .position(|(a, b)| !a.is_finite() || !b.is_finite())
            .map(|i| (i % self.width, i / self.width))
    }

    pub fn same_dims<U>(&self, other: &FlowField<U>) -> Result<()> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::DimensionMismatch {
                expected: (self.width, self.height, 2),
                actual: (other.width, other.height, 2),
            });
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> FlowField<U> {
        FlowField {
            width: self.width,
            height: self.height,
            u: self.u.iter().map(|&a| U::of(a.as_f64())).collect(),
            v: self.v.iter().map(|&b| U::of(b.as_f64())).collect(),
        }
    }

    pub fn into_planes(self) -> (Vec<T>, Vec<T>) {
        (self.u, self.v)
    }
}

/// Final flow as the element-wise sum of an initial and a residual flow.
pub fn compose_flows<T: Real>(initial: &FlowField<T>, residual: &FlowField<T>) -> Result<FlowField<T>> {
    initial.same_dims(residual)?;
    let add = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x + y).collect::<Vec<_>>();
    FlowField::new(
        initial.width,
        initial.height,
        add(&initial.u, &residual.u),
        add(&initial.v, &residual.v),
    )
}

#[inline]
fn lerp<T: Real>(a: T, b: T, t: T) -> T {
    a + (b - a) * t
}

fn resize_scalar_plane<T: Real>(
    src: &[T],
    width: usize,
    height: usize,
    new_width: usize,
    new_height: usize,
    gain: T,
) -> Vec<T> {
    let xt: Vec<(usize, usize, T)> = resize_taps(width, new_width)
        .into_iter()
        .map(|t| (t.i0, t.i1, T::of(t.t)))
        .collect();
    let yt = resize_taps(height, new_height);
    let mut out = vec![T::zero(); new_width * new_height];
    out.par_chunks_mut(new_width)
        .zip(yt.par_iter())
        .for_each(|(row, ty)| {
            let r0 = &src[ty.i0 * width..(ty.i0 + 1) * width];
            let r1 = &src[ty.i1 * width..(ty.i1 + 1) * width];
            let wy = T::of(ty.t);
            for (o, &(i0, i1, wx)) in row.iter_mut().zip(&xt) {
                let a = lerp(r0[i0], r0[i1], wx);
                let b = lerp(r1[i0], r1[i1], wx);
                *o = lerp(a, b, wy) * gain;
            }
        });
    out
}

/// Bilinear resize of both planes to `new_width`×`new_height`, then `u`
/// magnified by `new_width / width` and `v` by `new_height / height`.
pub fn upsample_flow<T: Real>(flow: &FlowField<T>, new_width: usize, new_height: usize) -> Result<FlowField<T>> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::ZeroDimension {
            what: "flow resize target",
        });
    }
    let gx = T::of(new_width as f64 / flow.width as f64);
    let gy = T::of(new_height as f64 / flow.height as f64);
    let (u, v) = rayon::join(
        || resize_scalar_plane(&flow.u, flow.width, flow.height, new_width, new_height, gx),
        || resize_scalar_plane(&flow.v, flow.width, flow.height, new_width, new_height, gy),
    );
    FlowField::new(new_width, new_height, u, v)
}

/// Mirror of a flow field under left-right image mirroring:
/// `u'(x, y) = -u(W-1-x, y)`, `v'(x, y) = v(W-1-x, y)`.
pub fn mirror_flow<T: Real>(flow: &FlowField<T>) -> FlowField<T> {
    let w = flow.width;
    let mut u = Vec::with_capacity(flow.u.len());
    let mut v = Vec::with_capacity(flow.v.len());
    for (ru, rv) in flow.u.chunks_exact(w).zip(flow.v.chunks_exact(w)) {
        u.extend(ru.iter().rev().map(|&a| -a));
        v.extend(rv.iter().rev().copied());
    }
    FlowField {
        width: flow.width,
        height: flow.height,
        u,
        v,
    }
}

/// Backward flow of a rigid rotation about the pixel-grid center: output
/// pixel `p` samples `rotate_about(p, c, θ)`. Warping an image tilted by `θ`
/// with this flow removes the tilt. Accepts `|θ| <= 90`.
pub fn analytic_rotation_flow<T: Real>(degrees: f64, width: usize, height: usize) -> Result<FlowField<T>> {
    if !(degrees.abs() <= 90.0) {
        return Err(Error::InvalidArgument(format!(
            "rotation angle must satisfy |theta| <= 90, got {degrees}"
        )));
    }
    let center = geometry::pixel_center(width, height);
    let (c, s) = geometry::cos_sin_deg(degrees);
    FlowField::from_fn(width, height, |x, y| {
        let p = (x as f64, y as f64);
        let (sx, sy) = geometry::rotate_with(p, center, c, s);
        (T::of(sx - p.0), T::of(sy - p.1))
    })
}
