//! Output files are written as `<name>.partial` and renamed into place, so
//! an interrupted command never leaves a truncated file under the final name.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use tiltwarp::{encode_png, Image};

pub fn partial_path(path: &Path) -> PathBuf {
    let mut s = OsString::from(path.as_os_str());
    s.push(".partial");
    PathBuf::from(s)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let tmp = partial_path(path);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} into place", tmp.display()))
}

pub fn write_png(path: &Path, img: &Image) -> anyhow::Result<()> {
    write_atomic(path, &encode_png(img)?)
}
