mod correct;
mod dataset;
mod evaluate;
mod serve;

pub use correct::{correct, WarpSource};
pub use dataset::{gen_dataset, image_seed, list_images, DatasetSummary, GT_DIR, INPUT_DIR, MANIFEST_FILE, MESH_DIR};
pub use evaluate::{evaluate, EvalReport, EvalRow};
pub use serve::serve;
