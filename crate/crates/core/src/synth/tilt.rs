//! Smooth tilt meshes standing in for content-aware rotation.
//!
//! Vertex `p` of the rigid lattice moves to
//! `p + w(p)·(R(θ)(p - c) + c - p)`, where `c` is the pixel-grid center and
//! `w = s(x)·s(y)` ramps from 0 on the frame boundary to 1 inside a core
//! rectangle inset by `inset` of each side. The frame stays rectangular
//! while the interior rotates rigidly by `θ`.

use crate::error::{Error, Result};
use crate::geometry::{cos_sin_deg, pixel_center, rotate_with, Point2};
use crate::image::Image;
use crate::mesh::Mesh;
use crate::warp::{inverse_mesh_warp, Boundary};

pub const MAX_TILT_DEGREES: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltConfig {
    /// Fraction of each frame side over which the weight ramps up.
    pub inset: f64,
}

impl Default for TiltConfig {
    fn default() -> Self {
        Self { inset: 0.25 }
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Weight along one axis for coordinate `x` in a frame of length `len`.
fn axis_weight(x: f64, len: f64, inset: f64) -> f64 {
    let d = x.min(len - x) / len;
    if d <= 0.0 {
        0.0
    } else if d >= inset {
        1.0
    } else {
        smoothstep(d / inset)
    }
}

/// Rigid lattice and its tilt-deformed counterpart for a content tilt of
/// `theta` degrees (positive = counterclockwise). `m_tilt` read as the
/// predicted mesh over `m_rig` is the correcting deformation.
pub fn synth_tilt_mesh(
    theta: f64,
    width: usize,
    height: usize,
    cols: usize,
    rows: usize,
    config: TiltConfig,
) -> Result<(Mesh<f64>, Mesh<f64>)> {
    if !(theta.abs() <= MAX_TILT_DEGREES) {
        return Err(Error::InvalidArgument(format!(
            "tilt angle must satisfy |theta| <= {MAX_TILT_DEGREES}, got {theta}"
        )));
    }
    if !(config.inset > 0.0 && config.inset <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "core inset must be in (0, 0.5], got {}",
            config.inset
        )));
    }
    let rig = Mesh::rigid(width, height, cols, rows)?;
    let center = pixel_center(width, height);
    let (c, s) = cos_sin_deg(theta);
    let (w, h) = (width as f64, height as f64);
    let tilt = rig.map_vertices(|p| {
        let weight = axis_weight(p.x, w, config.inset) * axis_weight(p.y, h, config.inset);
        if weight == 0.0 {
            return p;
        }
        let (rx, ry) = rotate_with((p.x, p.y), center, c, s);
        Point2::new(p.x + weight * (rx - p.x), p.y + weight * (ry - p.y))
    });
    tilt.validate()?;
    Ok((rig, tilt))
}

/// One synthetic training pair.
#[derive(Debug, Clone)]
pub struct Sample {
    pub input: Image,
    pub label: Image,
    pub angle: f64,
    pub m_rig: Mesh<f64>,
    pub m_tilt: Mesh<f64>,
}

/// Tilt `horizontal` by `theta`. The input is rendered by the inverse of the
/// `m_rig → m_tilt` warp so that `mesh_warp(input, m_rig, m_tilt)` corrects
/// it.
pub fn make_sample(horizontal: &Image, theta: f64, cols: usize, rows: usize, config: TiltConfig) -> Result<Sample> {
    let (m_rig, m_tilt) = synth_tilt_mesh(theta, horizontal.width(), horizontal.height(), cols, rows, config)?;
    let input = if theta == 0.0 {
        horizontal.to_unit()
    } else {
        inverse_mesh_warp(horizontal, &m_rig, &m_tilt, Boundary::ClampToEdge)?
    };
    Ok(Sample {
        input,
        label: horizontal.clone(),
        angle: theta,
        m_rig,
        m_tilt,
    })
}
