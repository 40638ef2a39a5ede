use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use fnv::FnvHasher;
use rayon::prelude::*;
use tiltwarp::formats::mesh_to_string;
use tiltwarp::synth::{assign_splits, make_sample, manifest, sample_angles, SampleRecord, Split, TiltConfig};
use tiltwarp::{load_image, resize_bilinear, Config};

use crate::output::{write_atomic, write_png};

pub const INPUT_DIR: &str = "input";
pub const GT_DIR: &str = "gt";
pub const MESH_DIR: &str = "mesh";
pub const MANIFEST_FILE: &str = "manifest.txt";
const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub records: usize,
    pub train: usize,
    pub test: usize,
    pub manifest: PathBuf,
}

/// PNG/JPEG files directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    let mut out = Vec::new();
    for e in entries {
        let p = e.with_context(|| format!("reading {}", dir.display()))?.path();
        let ext = p
            .extension()
            .and_then(|x| x.to_str())
            .map(|x| x.to_ascii_lowercase());
        if p.is_file() && ext.is_some_and(|x| IMAGE_EXTENSIONS.contains(&x.as_str())) {
            out.push(p);
        }
    }
    out.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(out)
}

/// Per-image angle seed: FNV-1a of the file name and the run seed.
pub fn image_seed(seed: u64, name: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(name.as_bytes());
    h.write(&seed.to_le_bytes());
    h.finish()
}

fn stem(p: &Path) -> anyhow::Result<String> {
    p.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .with_context(|| format!("file name of {} is not UTF-8", p.display()))
}

/// Six tilted samples per source image, resized to the working resolution,
/// with ground-truth meshes and a 9:1 split manifest.
pub fn gen_dataset(src_dir: &Path, out_dir: &Path, config: &Config) -> anyhow::Result<DatasetSummary> {
    let sources = list_images(src_dir)?;
    if sources.is_empty() {
        bail!("no PNG or JPEG images in {}", src_dir.display());
    }
    let stems: Vec<String> = sources.iter().map(|p| stem(p)).collect::<anyhow::Result<_>>()?;
    let mut sorted = stems.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != stems.len() {
        bail!("source images must have distinct file stems");
    }
    for d in [INPUT_DIR, GT_DIR, MESH_DIR] {
        let p = out_dir.join(d);
        fs::create_dir_all(&p).with_context(|| format!("creating {}", p.display()))?;
    }

    let (ww, wh) = config.work_res;
    let (cols, rows) = config.grid;
    let per_image: Vec<Vec<SampleRecord>> = sources
        .par_iter()
        .zip(&stems)
        .map(|(path, stem)| -> anyhow::Result<Vec<SampleRecord>> {
            let img = load_image(path)?;
            let label = if (img.width(), img.height()) == (ww, wh) {
                img
            } else {
                resize_bilinear(&img, ww, wh)?
            };
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or(stem);
            let mut records = Vec::with_capacity(6);
            for a in sample_angles(image_seed(config.seed, name)) {
                let s = make_sample(&label, a.degrees, cols, rows, TiltConfig::default())
                    .with_context(|| format!("{} at {} degrees", path.display(), a.degrees))?;
                let file = format!("{stem}_{}.png", a.interval_index);
                let mesh_file = format!("{stem}_{}.txt", a.interval_index);
                let rec = SampleRecord {
                    input: Path::new(INPUT_DIR).join(&file),
                    label: Path::new(GT_DIR).join(&file),
                    angle: a.degrees,
                    split: Split::Train,
                    mesh: Some(Path::new(MESH_DIR).join(&mesh_file)),
                };
                write_png(&out_dir.join(&rec.input), &s.input)?;
                write_png(&out_dir.join(&rec.label), &s.label)?;
                write_atomic(&out_dir.join(rec.mesh.as_ref().unwrap()), mesh_to_string(&s.m_tilt).as_bytes())?;
                records.push(rec);
            }
            Ok(records)
        })
        .collect::<anyhow::Result<_>>()?;

    let mut records: Vec<SampleRecord> = per_image.into_iter().flatten().collect();
    assign_splits(&mut records, config.seed);
    let manifest_path = out_dir.join(MANIFEST_FILE);
    write_atomic(&manifest_path, manifest::manifest_to_string(&records)?.as_bytes())?;
    let test = records.iter().filter(|r| r.split == Split::Test).count();
    Ok(DatasetSummary {
        records: records.len(),
        train: records.len() - test,
        test,
        manifest: manifest_path,
    })
}
