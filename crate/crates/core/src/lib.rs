//! Mesh-to-flow warping for rotation correction.
//!
//! A `U`×`V` mesh over the corrected (output) frame is paired with a
//! predicted mesh over the tilted (input) frame. Each cell's DLT homography
//! maps output pixels to input positions; rasterizing those maps gives a
//! dense backward flow, which is upsampled to full resolution and applied by
//! bilinear backward warping.
//!
//! Conventions used throughout:
//!
//! * Pixel centers sit at integer coordinates, `y` grows downward, and the
//!   center of a `W`×`H` raster is `((W-1)/2, (H-1)/2)`.
//! * The rigid lattice of a `W`×`H` frame has vertex `(i, j)` at
//!   `(i·W/U, j·H/V)`; `U` spans the width.
//! * Positive angles are counterclockwise on screen.
//!
//! ```
//! use tiltwarp::{analytic_rotation_flow, backward_warp, mesh_to_flow, Boundary, Image, Mesh64};
//! use tiltwarp::geometry::pixel_center;
//!
//! let rig = Mesh64::rigid(64, 48, 8, 6).unwrap();
//! let pre = rig.rotated_about(5.0, pixel_center(64, 48));
//! let flow: tiltwarp::FlowField32 = mesh_to_flow(&rig, &pre).unwrap();
//! let exact = analytic_rotation_flow::<f32>(5.0, 64, 48).unwrap();
//! let (_, max_epe) = tiltwarp::metrics::endpoint_error(&flow, &exact).unwrap();
//! assert!(max_epe < 1e-4);
//!
//! let img = Image::from_fn(64, 48, 1, |x, y, _| ((x ^ y) & 1) as f32).unwrap();
//! let corrected = backward_warp(&img, &flow, Boundary::default()).unwrap();
//! assert_eq!(corrected.dims(), (64, 48, 1));
//! ```

// negated comparisons reject NaN; index loops mirror the matrix notation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod flow;
pub mod formats;
pub mod geometry;
pub mod homography;
pub mod image;
pub mod mesh;
pub mod metrics;
pub mod pipeline;
pub mod scalar;
pub mod synth;
pub mod warp;

pub use error::{Error, Result};
pub use flow::{analytic_rotation_flow, compose_flows, mirror_flow, upsample_flow, FlowField};
pub use geometry::Point2;
pub use homography::{dlt_homography, Homography};
pub use image::{decode_image, encode_png, load_image, mirror_lr, resize_bilinear, save_image, Image};
pub use mesh::{grid_homographies, mirror_mesh, HomographyGrid, Mesh, DEFAULT_GRID};
pub use metrics::{endpoint_error, psnr, ssim, MetricReport};
pub use pipeline::{Config, Pipeline, DEFAULT_WORK_RES};
pub use scalar::Real;
pub use warp::{backward_warp, inverse_mesh_to_flow, inverse_mesh_warp, mesh_to_flow, mesh_warp, Boundary};

pub type Mesh64 = Mesh<f64>;
pub type Mesh32 = Mesh<f32>;
pub type Homography64 = Homography<f64>;
pub type Homography32 = Homography<f32>;
pub type FlowField32 = FlowField<f32>;
pub type FlowField64 = FlowField<f64>;
