//! Arbitrary-resolution correction: predict a flow at working resolution,
//! upsample it to the full image, and backward-warp at full resolution.

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::flow::{upsample_flow, FlowField};
use crate::image::{resize_bilinear, Image};
use crate::mesh::{Mesh, DEFAULT_GRID};
use crate::warp::{backward_warp, mesh_to_flow, Boundary};

pub const DEFAULT_WORK_RES: (usize, usize) = (512, 384);

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Mesh cells `(U, V)`; `U` spans the width.
    pub grid: (usize, usize),
    pub work_res: (usize, usize),
    pub boundary: Boundary,
    pub seed: u64,
    /// Worker threads; `None` uses every logical core.
    pub threads: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            work_res: DEFAULT_WORK_RES,
            boundary: Boundary::default(),
            seed: 0,
            threads: None,
        }
    }
}

impl Config {
    pub fn pipeline(&self) -> Result<Pipeline> {
        Pipeline::new(self.work_res.0, self.work_res.1, self.boundary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pipeline {
    work_width: usize,
    work_height: usize,
    boundary: Boundary,
}

impl Pipeline {
    pub fn new(work_width: usize, work_height: usize, boundary: Boundary) -> Result<Self> {
        if work_width == 0 || work_height == 0 {
            return Err(Error::ZeroDimension {
                what: "working resolution",
            });
        }
        Ok(Self {
            work_width,
            work_height,
            boundary,
        })
    }

    pub fn work_res(&self) -> (usize, usize) {
        (self.work_width, self.work_height)
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Downsample `full` to working resolution, obtain a flow from
    /// `predict`, and apply it at full resolution.
    pub fn run<P>(&self, full: &Image, predict: P) -> Result<Image>
    where
        P: FnOnce(&Image) -> Result<FlowField<f32>>,
    {
        let small = if (full.width(), full.height()) == self.work_res() {
            Cow::Borrowed(full)
        } else {
            Cow::Owned(resize_bilinear(full, self.work_width, self.work_height)?)
        };
        let flow = predict(&small)?;
        self.apply_flow(full, &flow)
    }

    /// Upsample `flow` (any resolution) to `full` and backward-warp.
    pub fn apply_flow(&self, full: &Image, flow: &FlowField<f32>) -> Result<Image> {
        let full_flow = full_res_flow(flow, full.width(), full.height())?;
        backward_warp(full, &full_flow, self.boundary)
    }

    /// Working-resolution flow of a predicted mesh; meshes in another frame
    /// are rescaled to the working frame first.
    pub fn mesh_flow(&self, m_pre: &Mesh<f64>) -> Result<FlowField<f32>> {
        let (w, h) = self.work_res();
        let pre = if (m_pre.frame_width(), m_pre.frame_height()) == (w, h) {
            Cow::Borrowed(m_pre)
        } else {
            Cow::Owned(m_pre.rescaled(w, h)?)
        };
        let rig = Mesh::rigid(w, h, pre.cols(), pre.rows())?;
        mesh_to_flow(&rig, &pre)
    }

    pub fn correct_with_mesh(&self, full: &Image, m_pre: &Mesh<f64>) -> Result<Image> {
        self.run(full, |_| self.mesh_flow(m_pre))
    }
}

/// `flow` upsampled to `width`×`height`, borrowed when already that size.
pub fn full_res_flow(flow: &FlowField<f32>, width: usize, height: usize) -> Result<Cow<'_, FlowField<f32>>> {
    if (flow.width(), flow.height()) == (width, height) {
        Ok(Cow::Borrowed(flow))
    } else {
        Ok(Cow::Owned(upsample_flow(flow, width, height)?))
    }
}
