//! Mesh-to-flow rasterization and backward warping.
//!
//! All kernels are per-pixel independent and parallelize over output rows,
//! so results are bit-identical for any thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::geometry::{quad_containment, Point2};
use crate::homography::Homography;
use crate::image::Image;
use crate::mesh::{cell_of_pixel, grid_homographies, HomographyGrid, Mesh};
use crate::scalar::Real;

/// Tolerance (px) when checking that a reference mesh is the rigid lattice.
const RIGID_TOL: f64 = 1e-6;

/// How samples outside the source image are resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Out-of-range taps read this unit-interval value.
    Constant(f32),
    ClampToEdge,
}

impl Default for Boundary {
    fn default() -> Self {
        Boundary::Constant(0.0)
    }
}

// Adding and subtracting 1.5·2^20 rounds to a multiple of 2^-32 for
// |v| < 2^19. Rounding is odd-symmetric, so a mirrored coordinate snaps to
// the mirrored value exactly.
const SNAP: f64 = 1_572_864.0;

#[inline(always)]
pub(crate) fn snap(v: f64) -> f64 {
    (v + SNAP) - SNAP
}

/// Integer part and fraction of a sample coordinate already clamped to
/// `[-2, n + 1]`.
#[inline(always)]
fn split(coord: f64) -> (isize, f64) {
    let i = (coord + 2.0) as isize - 2;
    (i, coord - i as f64)
}

struct Source<'a> {
    data: &'a [f32],
    width: usize,
    height: usize,
    boundary: Boundary,
}

impl Source<'_> {
    /// Bilinear sample at `(sx, sy)`; writes `C` channels into `out`.
    ///
    /// Weights are `(1 - f, f)` along each axis; a sample at integer
    /// coordinates returns the pixel unchanged.
    #[inline(always)]
    fn sample<const C: usize>(&self, sx: f64, sy: f64, out: &mut [f32]) {
        let sx = sx.clamp(-2.0, self.width as f64 + 1.0);
        let sy = sy.clamp(-2.0, self.height as f64 + 1.0);
        let (x0, fx) = split(sx);
        let (y0, fy) = split(sy);
        let wx = [(1.0 - fx) as f32, fx as f32];
        let wy = [(1.0 - fy) as f32, fy as f32];
        let (w, h) = (self.width as isize, self.height as isize);

        if x0 >= 0 && y0 >= 0 && x0 + 1 < w && y0 + 1 < h {
            let i00 = (y0 as usize * self.width + x0 as usize) * C;
            let i01 = i00 + self.width * C;
            for c in 0..C {
                let top = self.data[i00 + c] * wx[0] + self.data[i00 + C + c] * wx[1];
                let bot = self.data[i01 + c] * wx[0] + self.data[i01 + C + c] * wx[1];
                out[c] = (top * wy[0] + bot * wy[1]).clamp(0.0, 1.0);
            }
            return;
        }

        let tap = |x: isize, y: isize, c: usize| -> f32 {
            match self.boundary {
                Boundary::Constant(fill) => {
                    if x < 0 || y < 0 || x >= w || y >= h {
                        fill
                    } else {
                        self.data[(y as usize * self.width + x as usize) * C + c]
                    }
                }
                Boundary::ClampToEdge => {
                    let x = x.clamp(0, w - 1) as usize;
                    let y = y.clamp(0, h - 1) as usize;
                    self.data[(y * self.width + x) * C + c]
                }
            }
        };
        for c in 0..C {
            let top = tap(x0, y0, c) * wx[0] + tap(x0 + 1, y0, c) * wx[1];
            let bot = tap(x0, y0 + 1, c) * wx[0] + tap(x0 + 1, y0 + 1, c) * wx[1];
            out[c] = (top * wy[0] + bot * wy[1]).clamp(0.0, 1.0);
        }
    }
}

fn check_boundary(boundary: Boundary) -> Result<()> {
    if let Boundary::Constant(v) = boundary {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!(
                "constant fill {v} outside [0, 1]"
            )));
        }
    }
    Ok(())
}

/// Render an output image row by row; `coords(x, y)` yields the (already
/// snapped) source position of output pixel `(x, y)`.
pub(crate) fn render<F>(img: &Image, out_w: usize, out_h: usize, boundary: Boundary, coords: F) -> Result<Image>
where
    F: Fn(usize, usize) -> (f64, f64) + Sync,
{
    check_boundary(boundary)?;
    let data = img.unit_data();
    let src = Source {
        data: &data,
        width: img.width(),
        height: img.height(),
        boundary,
    };
    let c = img.channels();
    let mut out = vec![0.0f32; out_w * out_h * c];

    fn rows<const C: usize, F: Fn(usize, usize) -> (f64, f64) + Sync>(
        out: &mut [f32],
        out_w: usize,
        src: &Source<'_>,
        coords: &F,
    ) {
        out.par_chunks_mut(out_w * C)
            .enumerate()
            .for_each(|(y, row)| {
                for (x, px) in row.chunks_exact_mut(C).enumerate() {
                    let (sx, sy) = coords(x, y);
                    src.sample::<C>(sx, sy, px);
                }
            });
    }

    match c {
        1 => rows::<1, F>(&mut out, out_w, &src, &coords),
        3 => rows::<3, F>(&mut out, out_w, &src, &coords),
        _ => unreachable!("images have 1 or 3 channels"),
    }
    Image::from_unit(out_w, out_h, c, out)
}

/// `out(x, y) = bilinear(img, x + u(x, y), y + v(x, y))`.
pub fn backward_warp<F: Real>(img: &Image, flow: &FlowField<F>, boundary: Boundary) -> Result<Image> {
    if (flow.width(), flow.height()) != (img.width(), img.height()) {
        return Err(Error::DimensionMismatch {
            expected: img.dims(),
            actual: (flow.width(), flow.height(), img.channels()),
        });
    }
    let (u, v, w) = (flow.u(), flow.v(), flow.width());
    render(img, img.width(), img.height(), boundary, |x, y| {
        let i = y * w + x;
        (
            x as f64 + snap(u[i].as_f64()),
            y as f64 + snap(v[i].as_f64()),
        )
    })
}

fn check_reference<T: Real>(m_rig: &Mesh<T>) -> Result<()> {
    if !m_rig.is_rigid(RIGID_TOL) {
        return Err(Error::InvalidArgument(
            "reference mesh must be the rigid lattice of its frame".into(),
        ));
    }
    Ok(())
}

/// Per-column cell index along one axis of the rigid lattice.
fn cell_columns(width: usize, height: usize, cols: usize, rows: usize) -> (Vec<usize>, Vec<usize>) {
    let xs = (0..width).map(|x| cell_of_pixel(x, 0, width, height, cols, rows).0).collect();
    let ys = (0..height).map(|y| cell_of_pixel(0, y, width, height, cols, rows).1).collect();
    (xs, ys)
}

/// Dense backward flow of the piecewise-homography warp `m_rig → m_pre`.
///
/// Each pixel `(x, y)` of the rigid frame uses its cell's homography `H`:
/// `(u, v) = (h1·p / h3·p - x, h2·p / h3·p - y)` with `p = (x, y, 1)`.
pub fn mesh_to_flow<T: Real, F: Real>(m_rig: &Mesh<T>, m_pre: &Mesh<T>) -> Result<FlowField<F>> {
    check_reference(m_rig)?;
    let grid = grid_homographies(m_rig, m_pre)?;
    flow_from_grid(&grid, m_rig.frame_width(), m_rig.frame_height())
}

pub(crate) fn flow_from_grid<T: Real, F: Real>(
    grid: &HomographyGrid<T>,
    width: usize,
    height: usize,
) -> Result<FlowField<F>> {
    let (cx, cy) = cell_columns(width, height, grid.cols(), grid.rows());
    let mut u = vec![F::zero(); width * height];
    let mut v = vec![F::zero(); width * height];
    u.par_chunks_mut(width)
        .zip(v.par_chunks_mut(width))
        .enumerate()
        .for_each(|(y, (ru, rv))| {
            let yt = T::of(y as f64);
            for x in 0..width {
                let h = grid.get(cx[x], cy[y]);
                let xt = T::of(x as f64);
                let (sx, sy) = h.apply_xy(xt, yt);
                ru[x] = F::of((sx - xt).as_f64());
                rv[x] = F::of((sy - yt).as_f64());
            }
        });
    FlowField::new(width, height, u, v)
}

/// Piecewise-homography warp evaluated directly per pixel (no flow buffer):
/// `out(p) = bilinear(img, H_cell(p)(p))`.
///
/// The displacement is rounded to `f32` before sampling, so the result is
/// bit-identical to `backward_warp(img, mesh_to_flow::<T, f32>(..))`.
pub fn mesh_warp<T: Real>(img: &Image, m_rig: &Mesh<T>, m_pre: &Mesh<T>, boundary: Boundary) -> Result<Image> {
    check_reference(m_rig)?;
    if (img.width(), img.height()) != (m_rig.frame_width(), m_rig.frame_height()) {
        return Err(Error::DimensionMismatch {
            expected: (m_rig.frame_width(), m_rig.frame_height(), img.channels()),
            actual: img.dims(),
        });
    }
    let grid = grid_homographies(m_rig, m_pre)?;
    let (w, h) = (img.width(), img.height());
    let (cx, cy) = cell_columns(w, h, grid.cols(), grid.rows());
    render(img, w, h, boundary, |x, y| {
        let hm = grid.get(cx[x], cy[y]);
        let (xt, yt) = (T::of(x as f64), T::of(y as f64));
        let (sx, sy) = hm.apply_xy(xt, yt);
        // displacement rounded to f32 exactly as a stored flow would be
        let du = f32::of((sx - xt).as_f64());
        let dv = f32::of((sy - yt).as_f64());
        (x as f64 + snap(du as f64), y as f64 + snap(dv as f64))
    })
}

/// Backward flow of the inverse warp: for pixels `q` of the `m_pre` frame,
/// the cell of `m_pre` containing `q` maps it back onto `m_rig`.
///
/// Warping a mesh-corrected image with this flow re-applies the deformation,
/// so `backward_warp(img, inverse_mesh_to_flow(rig, pre))` followed by
/// `mesh_warp(·, rig, pre)` approximately reproduces `img`.
pub fn inverse_mesh_to_flow<T: Real, F: Real>(m_rig: &Mesh<T>, m_pre: &Mesh<T>) -> Result<FlowField<F>> {
    check_reference(m_rig)?;
    let grid = grid_homographies(m_rig, m_pre)?;
    let inverses: Vec<Homography<f64>> = grid
        .iter()
        .map(|h| h.cast::<f64>().inverse())
        .collect::<Result<_>>()?;
    let (w, h) = (m_pre.frame_width(), m_pre.frame_height());
    let (cols, rows) = (m_pre.cols(), m_pre.rows());
    let quads: Vec<[Point2<f64>; 4]> = (0..rows)
        .flat_map(|v| (0..cols).map(move |u| (u, v)))
        .map(|(u, v)| m_pre.cell_quad(u, v).map(|p| p.cast()))
        .collect();

    // Owner cell per pixel by best containment score; bounding-box raster.
    let mut owner = vec![usize::MAX; w * h];
    let mut score = vec![f64::NEG_INFINITY; w * h];
    const EPS: f64 = 1e-9;
    for (k, q) in quads.iter().enumerate() {
        let min_x = q.iter().map(|p| p.x).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let max_x = q.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max).ceil().min((w - 1) as f64) as usize;
        let min_y = q.iter().map(|p| p.y).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let max_y = q.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max).ceil().min((h - 1) as f64) as usize;
        for y in min_y..=max_y {
            for x in min_x..=max_x {
                let s = quad_containment(q, Point2::new(x as f64, y as f64));
                let i = y * w + x;
                if s >= -EPS && s > score[i] {
                    score[i] = s;
                    owner[i] = k;
                }
            }
        }
    }
    // Pixels on the frame's far edges can sit outside every cell; give them
    // the least-violated cell.
    for i in 0..w * h {
        if owner[i] == usize::MAX {
            let p = Point2::new((i % w) as f64, (i / w) as f64);
            let (best, _) = quads
                .iter()
                .map(|q| quad_containment(q, p))
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, s)| if s > acc.1 { (k, s) } else { acc });
            owner[i] = best;
        }
    }
    FlowField::from_fn(w, h, |x, y| {
        let hinv = &inverses[owner[y * w + x]];
        let (sx, sy) = hinv.apply_xy(x as f64, y as f64);
        (F::of(sx - x as f64), F::of(sy - y as f64))
    })
}

/// Apply the inverse of the `m_rig → m_pre` mesh warp to `img`.
pub fn inverse_mesh_warp<T: Real>(img: &Image, m_rig: &Mesh<T>, m_pre: &Mesh<T>, boundary: Boundary) -> Result<Image> {
    let flow: FlowField<f32> = inverse_mesh_to_flow(m_rig, m_pre)?;
    backward_warp(img, &flow, boundary)
}
