//! Synthetic tilt dataset construction: stratified angles, tilt meshes,
//! rigid-rotation and crop baselines, and the dataset manifest.

pub mod angles;
pub mod crop;
pub mod manifest;
pub mod rotate;
pub mod tilt;

pub use angles::{sample_angles, AngleSample, ANGLE_INTERVALS};
pub use crop::{max_inscribed_crop, Rect};
pub use manifest::{assign_splits, read_manifest, write_manifest, SampleRecord, Split};
pub use rotate::rigid_rotate;
pub use tilt::{make_sample, synth_tilt_mesh, Sample, TiltConfig};
