//! 3×3 projective maps and the four-point direct linear transform.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scalar::Real;

/// Pivot magnitude below which the reduced DLT system counts as singular.
pub const PIVOT_EPS: f64 = 1e-12;
/// Normalized triangle area below which three points count as collinear.
pub const COLLINEAR_EPS: f64 = 1e-9;

/// Projective map with the bottom-right entry normalized to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography<T> {
    a: [[T; 3]; 3],
}

impl<T: Real> Homography<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            a: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn translation(tx: T, ty: T) -> Self {
        let mut h = Self::identity();
        h.a[0][2] = tx;
        h.a[1][2] = ty;
        h
    }

    /// Normalize an arbitrary matrix so that `a33 = 1`.
    pub fn from_matrix(m: [[T; 3]; 3]) -> Result<Self> {
        let scale = m[2][2];
        if scale.abs().as_f64() < PIVOT_EPS || !scale.is_finite() {
            return Err(Error::NormalizationFailure(scale.as_f64()));
        }
        let mut a = m;
        for row in &mut a {
            for v in row.iter_mut() {
                *v = *v / scale;
            }
        }
        a[2][2] = T::one();
        let h = Self { a };
        if h.det().abs().as_f64() <= PIVOT_EPS || !h.det().is_finite() {
            return Err(Error::DegenerateConfiguration("singular homography"));
        }
        Ok(h)
    }

    pub fn matrix(&self) -> &[[T; 3]; 3] {
        &self.a
    }

    /// Row vector `h_k` (k = 0, 1, 2).
    pub fn row(&self, k: usize) -> [T; 3] {
        self.a[k]
    }

    pub fn det(&self) -> T {
        let a = &self.a;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// `(h1·p / h3·p, h2·p / h3·p)` for `p = (x, y, 1)`.
    #[inline]
    pub fn apply_xy(&self, x: T, y: T) -> (T, T) {
        let a = &self.a;
        let w = a[2][0] * x + a[2][1] * y + a[2][2];
        (
            (a[0][0] * x + a[0][1] * y + a[0][2]) / w,
            (a[1][0] * x + a[1][1] * y + a[1][2]) / w,
        )
    }

    pub fn apply(&self, p: Point2<T>) -> Point2<T> {
        let (x, y) = self.apply_xy(p.x, p.y);
        Point2::new(x, y)
    }

    pub fn inverse(&self) -> Result<Self> {
        let a = &self.a;
        let det = self.det();
        if det.abs().as_f64() <= PIVOT_EPS {
            return Err(Error::DegenerateConfiguration("singular homography"));
        }
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]
        };
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let mut m = adj;
        for row in &mut m {
            for v in row.iter_mut() {
                *v = *v / det;
            }
        }
        Self::from_matrix(m)
    }

    /// Largest entry-wise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut d = T::zero();
        for r in 0..3 {
            for c in 0..3 {
                d = d.max((self.a[r][c] - other.a[r][c]).abs());
            }
        }
        d
    }

    pub fn cast<U: Real>(&self) -> Homography<U> {
        let mut a = [[U::zero(); 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] = U::of(self.a[r][c].as_f64());
            }
        }
        Homography { a }
    }
}

fn mat_mul<T: Real>(x: &[[T; 3]; 3], y: &[[T; 3]; 3]) -> [[T; 3]; 3] {
    let mut out = [[T::zero(); 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = (0..3).fold(T::zero(), |acc, k| acc + x[r][k] * y[k][c]);
        }
    }
    out
}

/// Similarity moving the centroid to the origin with mean distance √2.
struct Normalization<T> {
    cx: T,
    cy: T,
    scale: T,
}

impl<T: Real> Normalization<T> {
    fn fit(pts: &[Point2<T>; 4]) -> Result<Self> {
        let four = T::of(4.0);
        let cx = pts.iter().fold(T::zero(), |a, p| a + p.x) / four;
        let cy = pts.iter().fold(T::zero(), |a, p| a + p.y) / four;
        let mean = pts
            .iter()
            .fold(T::zero(), |a, p| a + (p.x - cx).hypot(p.y - cy))
            / four;
        if !(mean.as_f64() > PIVOT_EPS) {
            return Err(Error::DegenerateConfiguration("coincident points"));
        }
        Ok(Self {
            cx,
            cy,
            scale: T::of(std::f64::consts::SQRT_2) / mean,
        })
    }

    fn apply(&self, p: Point2<T>) -> Point2<T> {
        Point2::new((p.x - self.cx) * self.scale, (p.y - self.cy) * self.scale)
    }

    fn forward(&self) -> [[T; 3]; 3] {
        let (o, z) = (T::one(), T::zero());
        let s = self.scale;
        [[s, z, -s * self.cx], [z, s, -s * self.cy], [z, z, o]]
    }

    fn backward(&self) -> [[T; 3]; 3] {
        let (o, z) = (T::one(), T::zero());
        let r = o / self.scale;
        [[r, z, self.cx], [z, r, self.cy], [z, z, o]]
    }
}

/// Reject configurations where any three of the (normalized) points are
/// collinear or two coincide.
fn check_general_position<T: Real>(pts: &[Point2<T>; 4]) -> Result<()> {
    const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    for [i, j, k] in TRIPLES {
        let (a, b, c) = (pts[i], pts[j], pts[k]);
        let area = ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)).abs() * T::of(0.5);
        if !(area.as_f64() >= COLLINEAR_EPS) {
            return Err(Error::DegenerateConfiguration("three collinear points"));
        }
    }
    Ok(())
}

/// Solve `m · h = rhs` in place by Gaussian elimination with partial pivoting.
fn solve8<T: Real>(mut m: [[T; 8]; 8], mut rhs: [T; 8]) -> Result<[T; 8]> {
    for col in 0..8 {
        let pivot_row = (col..8)
            .max_by(|&a, &b| {
                m[a][col]
                    .abs()
                    .partial_cmp(&m[b][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if !(m[pivot_row][col].abs().as_f64() >= PIVOT_EPS) {
            return Err(Error::DegenerateConfiguration("singular DLT system"));
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..8 {
            let f = m[row][col] / m[col][col];
            if f == T::zero() {
                continue;
            }
            for k in col..8 {
                m[row][k] = m[row][k] - f * m[col][k];
            }
            rhs[row] = rhs[row] - f * rhs[col];
        }
    }
    let mut h = [T::zero(); 8];
    for row in (0..8).rev() {
        let tail = (row + 1..8).fold(T::zero(), |acc, k| acc + m[row][k] * h[k]);
        h[row] = (rhs[row] - tail) / m[row][row];
    }
    Ok(h)
}

/// Homography mapping each `src[k]` onto `dst[k]`.
///
/// Both point sets are similarity-normalized, the 8×8 system obtained by
/// fixing the last entry to one is solved with partial pivoting, and the
/// result is de-normalized and rescaled so that `a33 = 1`. Identical point
/// sets yield the exact identity.
pub fn dlt_homography<T: Real>(src: &[Point2<T>; 4], dst: &[Point2<T>; 4]) -> Result<Homography<T>> {
    if src == dst {
        return Ok(Homography::identity());
    }
    let ns = Normalization::fit(src)?;
    let nd = Normalization::fit(dst)?;
    let s = src.map(|p| ns.apply(p));
    let d = dst.map(|p| nd.apply(p));
    check_general_position(&s)?;
    check_general_position(&d)?;

    let (o, z) = (T::one(), T::zero());
    let mut m = [[z; 8]; 8];
    let mut rhs = [z; 8];
    for k in 0..4 {
        let (x, y) = (s[k].x, s[k].y);
        let (u, v) = (d[k].x, d[k].y);
        m[2 * k] = [x, y, o, z, z, z, -x * u, -y * u];
        rhs[2 * k] = u;
        m[2 * k + 1] = [z, z, z, x, y, o, -x * v, -y * v];
        rhs[2 * k + 1] = v;
    }
    let h = solve8(m, rhs)?;
    let normalized = [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], o]];
    let full = mat_mul(&mat_mul(&nd.backward(), &normalized), &ns.forward());
    Homography::from_matrix(full)
}
