use std::path::{Path, PathBuf};

use anyhow::Context;
use tiltwarp::formats::{read_flow, read_mesh};
use tiltwarp::{load_image, Config};

use crate::output::write_png;

#[derive(Debug, Clone)]
pub enum WarpSource {
    Mesh(PathBuf),
    Flow(PathBuf),
}

/// Downsample to the working resolution, take the flow of the mesh (or the
/// given flow), upsample it to the input size and backward-warp.
pub fn correct(input: &Path, warp: &WarpSource, output: &Path, config: &Config) -> anyhow::Result<()> {
    let img = load_image(input)?;
    let pipeline = config.pipeline()?;
    let out = match warp {
        WarpSource::Mesh(p) => {
            let mesh = read_mesh(p).with_context(|| format!("mesh file {}", p.display()))?;
            pipeline.correct_with_mesh(&img, &mesh)?
        }
        WarpSource::Flow(p) => {
            let flow = read_flow(p).with_context(|| format!("flow file {}", p.display()))?;
            pipeline.apply_flow(&img, &flow)?
        }
    };
    write_png(output, &out)
}
