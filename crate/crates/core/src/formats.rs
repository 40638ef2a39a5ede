//! On-disk formats for meshes and flow fields.
//!
//! # Mesh file (UTF-8 text)
//!
//! ```text
//! tiltwarp-mesh 1
//! width <W>
//! height <H>
//! cols <U>
//! rows <V>
//! <m> <n>        # (U+1)·(V+1) vertex lines, j-major then i
//! ```
//!
//! Blank lines and text after `#` are ignored. Coordinates use the shortest
//! decimal form that parses back to the same `f64`, so a write/read round
//! trip is exact.
//!
//! # Flow file (binary, little-endian)
//!
//! `b"TWFL"`, `u32` width, `u32` height, then `width·height` `f32` values of
//! `u` in row-major order, then the same number of `v` values.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::geometry::Point2;
use crate::mesh::Mesh;

pub const MESH_MAGIC: &str = "tiltwarp-mesh 1";
pub const FLOW_MAGIC: &[u8; 4] = b"TWFL";

pub fn mesh_to_string(mesh: &Mesh<f64>) -> String {
    let mut s = String::with_capacity(32 * mesh.vertices().len() + 64);
    s.push_str(MESH_MAGIC);
    s.push('\n');
    s.push_str(&format!(
        "width {}\nheight {}\ncols {}\nrows {}\n",
        mesh.frame_width(),
        mesh.frame_height(),
        mesh.cols(),
        mesh.rows()
    ));
    for p in mesh.vertices() {
        s.push_str(&format!("{:?} {:?}\n", p.x, p.y));
    }
    s
}

pub fn parse_mesh(text: &str) -> Result<Mesh<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (n, magic) = lines.next().ok_or_else(|| Error::parse(1, "empty mesh file"))?;
    if magic != MESH_MAGIC {
        return Err(Error::parse(n, format!("expected `{MESH_MAGIC}`")));
    }
    let mut header = |key: &str| -> Result<usize> {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse(0, format!("missing `{key}` header")))?;
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(v), None) if k == key => v
                .parse()
                .map_err(|_| Error::parse(n, format!("`{key}` must be a non-negative integer"))),
            _ => Err(Error::parse(n, format!("expected `{key} <integer>`"))),
        }
    };
    let width = header("width")?;
    let height = header("height")?;
    let cols = header("cols")?;
    let rows = header("rows")?;
    if cols == 0 || rows == 0 || width == 0 || height == 0 {
        return Err(Error::parse(0, "mesh header has a zero dimension"));
    }

    let expected = (cols + 1) * (rows + 1);
    let mut vertices = Vec::with_capacity(expected);
    for (n, line) in lines {
        if vertices.len() == expected {
            return Err(Error::parse(n, "more vertex lines than the header declares"));
        }
        let mut parts = line.split_whitespace();
        let coord = |tok: Option<&str>| -> Result<f64> {
            let v: f64 = tok
                .ok_or_else(|| Error::parse(n, "expected `<m> <n>`"))?
                .parse()
                .map_err(|_| Error::parse(n, "vertex coordinate is not a number"))?;
            if !v.is_finite() {
                return Err(Error::parse(n, "vertex coordinate is not finite"));
            }
            Ok(v)
        };
        let m = coord(parts.next())?;
        let nn = coord(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::parse(n, "expected exactly two coordinates"));
        }
        vertices.push(Point2::new(m, nn));
    }
    if vertices.len() != expected {
        return Err(Error::parse(
            0,
            format!("found {} vertex lines, header declares {expected}", vertices.len()),
        ));
    }
    Mesh::from_vertices(width, height, cols, rows, vertices)
}

pub fn write_mesh(mesh: &Mesh<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, mesh_to_string(mesh)).map_err(|e| Error::io(path, e))
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text)
}

pub fn flow_to_bytes(flow: &FlowField<f32>) -> Vec<u8> {
    let n = flow.width() * flow.height();
    let mut out = Vec::with_capacity(12 + 8 * n);
    out.extend_from_slice(FLOW_MAGIC);
    out.extend_from_slice(&(flow.width() as u32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as u32).to_le_bytes());
    for v in flow.u().iter().chain(flow.v()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn flow_from_bytes(bytes: &[u8]) -> Result<FlowField<f32>> {
    if bytes.len() < 12 || &bytes[..4] != FLOW_MAGIC {
        return Err(Error::Decode("not a TWFL flow file".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (w, h) = (word(4), word(8));
    let n = w
        .checked_mul(h)
        .ok_or_else(|| Error::Decode("flow dimensions overflow".into()))?;
    if bytes.len() != 12 + 8 * n {
        return Err(Error::Decode(format!(
            "flow file is {} bytes, expected {} for {w}x{h}",
            bytes.len(),
            12 + 8 * n
        )));
    }
    let floats: Vec<f32> = bytes[12..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (u, v) = floats.split_at(n);
    FlowField::new(w, h, u.to_vec(), v.to_vec())
}

pub fn write_flow(flow: &FlowField<f32>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, flow_to_bytes(flow)).map_err(|e| Error::io(path, e))
}

pub fn read_flow(path: impl AsRef<Path>) -> Result<FlowField<f32>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    flow_from_bytes(&bytes)
}
