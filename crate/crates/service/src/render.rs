//! Preview and export rendering. Both are pure functions of the source image
//! and a mesh snapshot, so clients can reproduce them offline.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use tiltwarp::formats::{flow_to_bytes, mesh_to_string};
use tiltwarp::{encode_png, mesh_warp, resize_bilinear, Boundary, FlowField32, Image, Mesh64, Pipeline};

/// Size of a preview whose longer side is at most `max_dim`; never upscales.
pub fn preview_size(width: usize, height: usize, max_dim: usize) -> (usize, usize) {
    let long = width.max(height);
    if long <= max_dim {
        return (width, height);
    }
    let s = max_dim as f64 / long as f64;
    let scaled = |v: usize| ((v as f64 * s).round() as usize).max(1);
    (scaled(width), scaled(height))
}

/// `mesh_warp` of the bilinearly downscaled source by the mesh rescaled to
/// the preview frame.
pub fn render_preview(source: &Image, mesh: &Mesh64, max_dim: usize, boundary: Boundary) -> tiltwarp::Result<Image> {
    let (pw, ph) = preview_size(source.width(), source.height(), max_dim);
    let rig = Mesh64::rigid(pw, ph, mesh.cols(), mesh.rows())?;
    if (pw, ph) == (source.width(), source.height()) {
        return mesh_warp(source, &rig, mesh, boundary);
    }
    let small = resize_bilinear(source, pw, ph)?;
    mesh_warp(&small, &rig, &mesh.rescaled(pw, ph)?, boundary)
}

/// Full-resolution correction: flow at working resolution, upsampled and
/// applied to the source. Returns the corrected image and the
/// working-resolution flow.
pub fn render_export(source: &Image, mesh: &Mesh64, pipeline: &Pipeline) -> tiltwarp::Result<(Image, FlowField32)> {
    let flow = pipeline.mesh_flow(mesh)?;
    let corrected = pipeline.apply_flow(source, &flow)?;
    Ok((corrected, flow))
}

#[derive(Debug, Clone)]
pub struct ExportFiles {
    pub corrected: PathBuf,
    pub mesh: PathBuf,
    pub flow: PathBuf,
}

pub const CORRECTED_FILE: &str = "corrected.png";
pub const MESH_FILE: &str = "mesh.txt";
pub const FLOW_FILE: &str = "flow.twfl";

/// Write via `<name>.partial` then rename, so readers never see a torn file.
fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut partial = path.as_os_str().to_owned();
    partial.push(".partial");
    fs::write(&partial, bytes)?;
    fs::rename(&partial, path)
}

pub fn write_export(
    dir: &Path,
    corrected: &Image,
    mesh: &Mesh64,
    flow: &FlowField32,
) -> Result<ExportFiles, crate::ApiError> {
    let io_err = |e: io::Error| crate::ApiError::internal(format!("export to {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io_err)?;
    let files = ExportFiles {
        corrected: dir.join(CORRECTED_FILE),
        mesh: dir.join(MESH_FILE),
        flow: dir.join(FLOW_FILE),
    };
    write_atomic(&files.corrected, &encode_png(corrected)?).map_err(io_err)?;
    write_atomic(&files.mesh, mesh_to_string(mesh).as_bytes()).map_err(io_err)?;
    write_atomic(&files.flow, &flow_to_bytes(flow)).map_err(io_err)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene(w: usize, h: usize) -> Image {
        Image::from_fn(w, h, 3, |x, y, c| 0.5 + 0.4 * ((x as f32 * 0.05 + c as f32).sin() * (y as f32 * 0.04).cos()))
            .unwrap()
    }

    #[test]
    fn preview_sizes() {
        assert_eq!(preview_size(2048, 1536, 512), (512, 384));
        assert_eq!(preview_size(300, 200, 512), (300, 200));
        assert_eq!(preview_size(1000, 10, 100), (100, 1));
    }

    #[test]
    fn rigid_preview_is_downscaled_source() {
        let src = scene(1024, 768);
        let rig = Mesh64::rigid(1024, 768, 8, 6).unwrap();
        let p = render_preview(&src, &rig, 512, Boundary::default()).unwrap();
        assert_eq!(p.unit_data(), resize_bilinear(&src, 512, 384).unwrap().unit_data());
    }

    #[test]
    fn full_size_preview_equals_export_at_working_resolution() {
        let src = scene(512, 384);
        let rig = Mesh64::rigid(512, 384, 8, 6).unwrap();
        let mesh = rig.rotated_about(4.0, tiltwarp::geometry::pixel_center(512, 384));
        let pipeline = Pipeline::new(512, 384, Boundary::default()).unwrap();
        let preview = render_preview(&src, &mesh, 512, Boundary::default()).unwrap();
        let (export, _) = render_export(&src, &mesh, &pipeline).unwrap();
        assert_eq!(preview.unit_data(), export.unit_data());
    }

    #[test]
    fn rigid_export_is_source() {
        let src = scene(640, 480);
        let rig = Mesh64::rigid(640, 480, 8, 6).unwrap();
        let pipeline = Pipeline::new(512, 384, Boundary::default()).unwrap();
        let (out, flow) = render_export(&src, &rig, &pipeline).unwrap();
        assert_eq!(out.unit_data(), src.unit_data());
        assert_eq!((flow.width(), flow.height()), (512, 384));
    }
}
