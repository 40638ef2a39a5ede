//! Quad meshes over an image frame and per-cell homographies.
//!
//! A mesh with `cols` × `rows` cells has `(cols + 1) × (rows + 1)` vertices,
//! addressed `(i, j)` with `i` along the width and `j` along the height. For
//! 512×384 frames the default 8×6 grid therefore has square 64 px cells.

use crate::error::{Error, Result};
use crate::geometry::{self, Point2};
use crate::homography::{dlt_homography, Homography};
use crate::scalar::Real;

/// Default mesh resolution (cells along width, cells along height).
pub const DEFAULT_GRID: (usize, usize) = (8, 6);

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    cols: usize,
    rows: usize,
    frame_width: usize,
    frame_height: usize,
    /// Row-major: vertex `(i, j)` at `j * (cols + 1) + i`.
    vertices: Vec<Point2<T>>,
}

impl<T: Real> Mesh<T> {
    /// The rigid lattice: vertex `(i, j)` at `(i·W/U, j·H/V)`.
    pub fn rigid(width: usize, height: usize, cols: usize, rows: usize) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(Error::ZeroDimension { what: "cell count" });
        }
        if width <= cols || height <= rows {
            return Err(Error::InvalidArgument(format!(
                "frame {width}x{height} too small for a {cols}x{rows} mesh"
            )));
        }
        let mut vertices = Vec::with_capacity((cols + 1) * (rows + 1));
        for j in 0..=rows {
            for i in 0..=cols {
                vertices.push(Point2::new(
                    T::of((i * width) as f64 / cols as f64),
                    T::of((j * height) as f64 / rows as f64),
                ));
            }
        }
        Ok(Self {
            cols,
            rows,
            frame_width: width,
            frame_height: height,
            vertices,
        })
    }

    /// Build from explicit vertices (row-major, `(cols+1)*(rows+1)` entries).
    /// Quad validity is not checked here; see [`Mesh::validate`].
    pub fn from_vertices(
        frame_width: usize,
        frame_height: usize,
        cols: usize,
        rows: usize,
        vertices: Vec<Point2<T>>,
    ) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(Error::ZeroDimension { what: "cell count" });
        }
        if frame_width == 0 || frame_height == 0 {
            return Err(Error::ZeroDimension { what: "mesh frame" });
        }
        if vertices.len() != (cols + 1) * (rows + 1) {
            return Err(Error::MeshShapeMismatch(format!(
                "{} vertices for a {cols}x{rows} mesh, expected {}",
                vertices.len(),
                (cols + 1) * (rows + 1)
            )));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidArgument("non-finite vertex".into()));
        }
        Ok(Self {
            cols,
            rows,
            frame_width,
            frame_height,
            vertices,
        })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn frame_width(&self) -> usize {
        self.frame_width
    }

    pub fn frame_height(&self) -> usize {
        self.frame_height
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize, j: usize) -> Point2<T> {
        self.vertices[j * (self.cols + 1) + i]
    }

    pub fn set_vertex(&mut self, i: usize, j: usize, p: Point2<T>) {
        let idx = j * (self.cols + 1) + i;
        self.vertices[idx] = p;
    }

    /// Corners of cell `(u, v)`: top-left, top-right, bottom-right, bottom-left.
    pub fn cell_quad(&self, u: usize, v: usize) -> [Point2<T>; 4] {
        [
            self.vertex(u, v),
            self.vertex(u + 1, v),
            self.vertex(u + 1, v + 1),
            self.vertex(u, v + 1),
        ]
    }

    /// First cell (row-major) that is not strictly convex and positively oriented.
    pub fn first_invalid_cell(&self) -> Option<(usize, usize)> {
        (0..self.rows)
            .flat_map(|v| (0..self.cols).map(move |u| (u, v)))
            .find(|&(u, v)| !geometry::is_valid_quad(&self.cell_quad(u, v)))
    }

    pub fn validate(&self) -> Result<()> {
        match self.first_invalid_cell() {
            Some((u, v)) => Err(Error::InvalidQuad(u, v)),
            None => Ok(()),
        }
    }

    pub fn same_shape(&self, other: &Mesh<T>) -> Result<()> {
        if (self.cols, self.rows, self.frame_width, self.frame_height)
            != (other.cols, other.rows, other.frame_width, other.frame_height)
        {
            return Err(Error::MeshShapeMismatch(format!(
                "{}x{} cells on {}x{} vs {}x{} cells on {}x{}",
                self.cols,
                self.rows,
                self.frame_width,
                self.frame_height,
                other.cols,
                other.rows,
                other.frame_width,
                other.frame_height
            )));
        }
        Ok(())
    }

    /// True if every vertex lies within `tol` px of the rigid lattice.
    pub fn is_rigid(&self, tol: f64) -> bool {
        Mesh::<f64>::rigid(self.frame_width, self.frame_height, self.cols, self.rows)
            .map(|r| {
                r.vertices
                    .iter()
                    .zip(&self.vertices)
                    .all(|(a, b)| a.distance(b.cast()) <= tol)
            })
            .unwrap_or(false)
    }

    pub fn map_vertices(&self, mut f: impl FnMut(Point2<T>) -> Point2<T>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
            ..self.clone()
        }
    }

    pub fn translated(&self, dx: T, dy: T) -> Self {
        self.map_vertices(|p| Point2::new(p.x + dx, p.y + dy))
    }

    /// Every vertex rotated about `center` (counterclockwise on screen).
    pub fn rotated_about(&self, degrees: f64, center: (f64, f64)) -> Self {
        let (c, s) = geometry::cos_sin_deg(degrees);
        self.map_vertices(|p| {
            let (x, y) = geometry::rotate_with((p.x.as_f64(), p.y.as_f64()), center, c, s);
            Point2::new(T::of(x), T::of(y))
        })
    }

    /// Same mesh expressed in a `width`×`height` frame (vertices scaled per axis).
    pub fn rescaled(&self, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension { what: "mesh frame" });
        }
        let sx = T::of(width as f64 / self.frame_width as f64);
        let sy = T::of(height as f64 / self.frame_height as f64);
        let mut m = self.map_vertices(|p| Point2::new(p.x * sx, p.y * sy));
        m.frame_width = width;
        m.frame_height = height;
        Ok(m)
    }

    pub fn cast<U: Real>(&self) -> Mesh<U> {
        Mesh {
            cols: self.cols,
            rows: self.rows,
            frame_width: self.frame_width,
            frame_height: self.frame_height,
            vertices: self.vertices.iter().map(|p| p.cast()).collect(),
        }
    }
}

/// Left-right mirror about the frame's vertical center line:
/// vertex `(i, j)` becomes `(W - m[U-i, j], n[U-i, j])`.
pub fn mirror_mesh<T: Real>(mesh: &Mesh<T>) -> Mesh<T> {
    let w = T::of(mesh.frame_width as f64);
    let mut out = mesh.clone();
    for j in 0..=mesh.rows {
        for i in 0..=mesh.cols {
            let p = mesh.vertex(mesh.cols - i, j);
            out.set_vertex(i, j, Point2::new(w - p.x, p.y));
        }
    }
    out
}

/// Cell `(u, v)` containing pixel `(x, y)` on the rigid lattice of a
/// `width`×`height` frame: `(min(floor(x·U/W), U-1), min(floor(y·V/H), V-1))`.
#[inline]
pub fn cell_of_pixel(
    x: usize,
    y: usize,
    width: usize,
    height: usize,
    cols: usize,
    rows: usize,
) -> (usize, usize) {
    ((x * cols / width).min(cols - 1), (y * rows / height).min(rows - 1))
}

/// `cols`×`rows` homographies, row-major by cell.
#[derive(Debug, Clone, PartialEq)]
pub struct HomographyGrid<T> {
    cols: usize,
    rows: usize,
    cells: Vec<Homography<T>>,
}

impl<T: Real> HomographyGrid<T> {
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn get(&self, u: usize, v: usize) -> &Homography<T> {
        &self.cells[v * self.cols + u]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Homography<T>> {
        self.cells.iter()
    }
}

/// One DLT homography per cell, mapping the `m_rig` cell onto the `m_pre`
/// cell. Because `m_rig` lives on the corrected (output) image and `m_pre`
/// on the tilted (input) image, each map sends output coordinates to input
/// coordinates, which is what backward sampling needs.
pub fn grid_homographies<T: Real>(m_rig: &Mesh<T>, m_pre: &Mesh<T>) -> Result<HomographyGrid<T>> {
    m_rig.same_shape(m_pre)?;
    m_rig.validate()?;
    m_pre.validate()?;
    let mut cells = Vec::with_capacity(m_rig.cols * m_rig.rows);
    for v in 0..m_rig.rows {
        for u in 0..m_rig.cols {
            let h = dlt_homography(&m_rig.cell_quad(u, v), &m_pre.cell_quad(u, v))
                .map_err(|e| match e {
                    Error::DegenerateConfiguration(_) => Error::InvalidQuad(u, v),
                    other => other,
                })?;
            cells.push(h);
        }
    }
    Ok(HomographyGrid {
        cols: m_rig.cols,
        rows: m_rig.rows,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigid_lattice_positions() {
        let m = Mesh::<f64>::rigid(512, 384, 8, 6).unwrap();
        assert_eq!(m.vertices().len(), 9 * 7);
        assert_eq!(m.vertex(1, 1), Point2::new(64.0, 64.0));
        assert_eq!(m.vertex(8, 6), Point2::new(512.0, 384.0));
        let m = Mesh::<f64>::rigid(10, 10, 1, 1).unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn rigid_rejects_zero_cells() {
        assert!(matches!(
            Mesh::<f64>::rigid(512, 384, 0, 6),
            Err(Error::ZeroDimension { .. })
        ));
        assert!(Mesh::<f64>::rigid(8, 384, 8, 6).is_err());
    }

    #[test]
    fn cell_membership_matches_floor_arithmetic() {
        let (w, h, u, v) = (512, 384, 8, 6);
        assert_eq!(cell_of_pixel(0, 0, w, h, u, v), (0, 0));
        assert_eq!(cell_of_pixel(63, 63, w, h, u, v), (0, 0));
        assert_eq!(cell_of_pixel(64, 64, w, h, u, v), (1, 1));
        assert_eq!(cell_of_pixel(511, 383, w, h, u, v), (7, 5));
        // Non-divisible frame: every pixel lands in exactly one in-range cell
        // and the cell's lattice span contains it.
        let (w, h, u, v) = (101, 37, 8, 6);
        for y in 0..h {
            for x in 0..w {
                let (cu, cv) = cell_of_pixel(x, y, w, h, u, v);
                assert!(cu < u && cv < v);
                let x0 = cu as f64 * w as f64 / u as f64;
                let x1 = (cu + 1) as f64 * w as f64 / u as f64;
                assert!(x as f64 >= x0 && (x as f64) < x1);
                let y0 = cv as f64 * h as f64 / v as f64;
                let y1 = (cv + 1) as f64 * h as f64 / v as f64;
                assert!(y as f64 >= y0 && (y as f64) < y1);
            }
        }
    }

    #[test]
    fn validity_reports_offending_cell() {
        let mut m = Mesh::<f64>::rigid(512, 384, 8, 6).unwrap();
        // push vertex (3, 2) past its right neighbour
        m.set_vertex(3, 2, Point2::new(64.0 * 4.0 + 10.0, 128.0));
        let bad = m.first_invalid_cell().unwrap();
        assert!(bad.0 >= 2 && bad.0 <= 3 && bad.1 >= 1 && bad.1 <= 2);
        assert!(matches!(m.validate(), Err(Error::InvalidQuad(_, _))));
    }

    #[test]
    fn mirror_mesh_involution_and_rigid_fixed_point() {
        let rig = Mesh::<f64>::rigid(512, 384, 8, 6).unwrap();
        assert_eq!(mirror_mesh(&rig), rig);
        let m = rig.rotated_about(4.0, (255.5, 191.5));
        let back = mirror_mesh(&mirror_mesh(&m));
        let err = back
            .vertices()
            .iter()
            .zip(m.vertices())
            .map(|(a, b)| a.distance(*b))
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        assert!(mirror_mesh(&m).validate().is_ok());
    }

    #[test]
    fn homographies_identity_and_translation() {
        let rig = Mesh::<f64>::rigid(512, 384, 8, 6).unwrap();
        let grid = grid_homographies(&rig, &rig).unwrap();
        assert!(grid.iter().all(|h| *h == Homography::identity()));
        let moved = rig.translated(3.0, -2.0);
        let grid = grid_homographies(&rig, &moved).unwrap();
        let t = Homography::translation(3.0, -2.0);
        assert!(grid.iter().all(|h| h.max_abs_diff(&t) < 1e-10));
    }

    #[test]
    fn homographies_shape_mismatch() {
        let a = Mesh::<f64>::rigid(512, 384, 8, 6).unwrap();
        let b = Mesh::<f64>::rigid(512, 384, 4, 3).unwrap();
        assert!(matches!(
            grid_homographies(&a, &b),
            Err(Error::MeshShapeMismatch(_))
        ));
    }
}
