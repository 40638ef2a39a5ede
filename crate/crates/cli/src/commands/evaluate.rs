use std::fmt::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rayon::prelude::*;
use tiltwarp::synth::{read_manifest, Split};
use tiltwarp::{load_image, psnr, ssim, MetricReport};

use crate::args::SplitArg;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub name: String,
    pub psnr_db: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub summary: MetricReport,
}

impl EvalReport {
    /// Tab-separated: a header, one row per image in manifest order, then a
    /// `mean` row.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("image\tpsnr_db\tssim\n");
        for r in &self.rows {
            let _ = writeln!(s, "{}\t{:.4}\t{:.6}", r.name, r.psnr_db, r.ssim);
        }
        let _ = writeln!(s, "mean\t{:.4}\t{:.6}", self.summary.psnr_db, self.summary.ssim);
        s
    }
}

/// Score `predictions/<input file name>` against each record's label.
pub fn evaluate(manifest: &Path, predictions: &Path, split: SplitArg) -> anyhow::Result<EvalReport> {
    let root = manifest.parent().unwrap_or(Path::new("."));
    let records = read_manifest(manifest)?;
    let chosen: Vec<_> = records
        .iter()
        .filter(|r| match split {
            SplitArg::All => true,
            SplitArg::Test => r.split == Split::Test,
            SplitArg::Train => r.split == Split::Train,
        })
        .collect();
    if chosen.is_empty() {
        bail!("no records in the selected split of {}", manifest.display());
    }
    let jobs: Vec<(String, PathBuf, PathBuf)> = chosen
        .iter()
        .map(|r| {
            let name = r
                .input
                .file_name()
                .with_context(|| format!("record input {} has no file name", r.input.display()))?;
            Ok((name.to_string_lossy().into_owned(), predictions.join(name), root.join(&r.label)))
        })
        .collect::<anyhow::Result<_>>()?;
    let missing: Vec<&str> = jobs
        .iter()
        .filter(|(_, p, _)| !p.is_file())
        .map(|(n, _, _)| n.as_str())
        .collect();
    if !missing.is_empty() {
        bail!("missing predictions for {} record(s): {}", missing.len(), missing.join(", "));
    }
    let rows: Vec<EvalRow> = jobs
        .par_iter()
        .map(|(name, pred, label)| -> anyhow::Result<EvalRow> {
            let p = load_image(pred)?;
            let l = load_image(label)?;
            Ok(EvalRow {
                name: name.clone(),
                psnr_db: psnr(&p, &l).with_context(|| format!("comparing {name}"))?,
                ssim: ssim(&p, &l).with_context(|| format!("comparing {name}"))?,
            })
        })
        .collect::<anyhow::Result<_>>()?;
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.psnr_db, r.ssim)).collect();
    Ok(EvalReport {
        summary: MetricReport::from_pairs(&pairs)?,
        rows,
    })
}
