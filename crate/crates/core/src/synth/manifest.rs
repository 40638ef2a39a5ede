//! Dataset manifest.
//!
//! One record per line, fields separated by a single TAB, each `key=value`:
//!
//! ```text
//! input=input/img_0.png<TAB>label=gt/img_0.png<TAB>angle=-8.25<TAB>split=train[<TAB>mesh=mesh/img_0.txt]
//! ```
//!
//! `input`, `label`, `angle` and `split` are required and appear in that
//! order; `mesh` is optional. Paths are stored as written (normally relative
//! to the manifest's directory). `angle` is signed degrees, positive for a
//! counterclockwise content tilt, written in shortest round-trip form.
//! `split` is `train` or `test`. Values may not contain TAB or newline.
//! Blank lines are ignored.

use std::fmt;
use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fnv::FnvHasher;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub input: PathBuf,
    pub label: PathBuf,
    pub angle: f64,
    pub split: Split,
    pub mesh: Option<PathBuf>,
}

fn path_field(key: &str, p: &Path) -> Result<String> {
    let s = p
        .to_str()
        .ok_or_else(|| Error::InvalidArgument(format!("{key} path is not UTF-8: {}", p.display())))?;
    if s.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidArgument(format!("{key} path contains a tab or newline: {s:?}")));
    }
    Ok(format!("{key}={s}"))
}

pub fn manifest_to_string(records: &[SampleRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        if !r.angle.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite angle for {}", r.input.display())));
        }
        let mut fields = vec![
            path_field("input", &r.input)?,
            path_field("label", &r.label)?,
            format!("angle={:?}", r.angle),
            format!("split={}", r.split),
        ];
        if let Some(m) = &r.mesh {
            fields.push(path_field("mesh", m)?);
        }
        out.push_str(&fields.join("\t"));
        out.push('\n');
    }
    Ok(out)
}

fn expect_field<'a>(
    fields: &mut impl Iterator<Item = Result<(&'a str, &'a str)>>,
    key: &str,
    line: usize,
) -> Result<&'a str> {
    match fields.next() {
        Some(Ok((k, v))) if k == key => Ok(v),
        Some(Ok((k, _))) => Err(Error::parse(line, format!("expected `{key}`, found `{k}`"))),
        Some(Err(e)) => Err(e),
        None => Err(Error::parse(line, format!("missing `{key}`"))),
    }
}

pub fn parse_manifest(text: &str) -> Result<Vec<SampleRecord>> {
    let mut records = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let n = k + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t').map(|f| {
            f.split_once('=')
                .ok_or_else(|| Error::parse(n, format!("field `{f}` is not key=value")))
        });
        let input = PathBuf::from(expect_field(&mut fields, "input", n)?);
        let label = PathBuf::from(expect_field(&mut fields, "label", n)?);
        let angle: f64 = expect_field(&mut fields, "angle", n)?
            .parse()
            .map_err(|_| Error::parse(n, "angle is not a number"))?;
        if !angle.is_finite() {
            return Err(Error::parse(n, "angle is not finite"));
        }
        let split = expect_field(&mut fields, "split", n)?.parse().map_err(|e: String| Error::parse(n, e))?;
        let mesh = match fields.next() {
            None => None,
            Some(Ok(("mesh", v))) => Some(PathBuf::from(v)),
            Some(Ok((k, _))) => return Err(Error::parse(n, format!("unexpected field `{k}`"))),
            Some(Err(e)) => return Err(e),
        };
        if fields.next().is_some() {
            return Err(Error::parse(n, "trailing fields"));
        }
        records.push(SampleRecord {
            input,
            label,
            angle,
            split,
            mesh,
        });
    }
    Ok(records)
}

pub fn write_manifest(records: &[SampleRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, manifest_to_string(records)?).map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<SampleRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text)
}

fn split_key(label: &Path, seed: u64) -> u64 {
    let name = label.file_name().map(|n| n.as_encoded_bytes()).unwrap_or_default();
    let mut h = FnvHasher::default();
    h.write(name);
    h.write(&seed.to_le_bytes());
    h.finish()
}

/// Assign a 9:1 train/test split: records are ranked by an FNV-1a hash of
/// their label file name and `seed`, and the lowest `round(n / 10)` go to
/// the test split. The result does not depend on record order.
pub fn assign_splits(records: &mut [SampleRecord], seed: u64) {
    let mut order: Vec<(u64, &Path, usize)> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (split_key(&r.label, seed), r.label.as_path(), i))
        .collect();
    order.sort();
    let n_test = (records.len() + 5) / 10;
    let test: Vec<usize> = order[..n_test].iter().map(|&(_, _, i)| i).collect();
    for r in records.iter_mut() {
        r.split = Split::Train;
    }
    for i in test {
        records[i].split = Split::Test;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(i: usize, angle: f64) -> SampleRecord {
        SampleRecord {
            input: format!("input/img{i}.png").into(),
            label: format!("gt/img{i}.png").into(),
            angle,
            split: Split::Train,
            mesh: i.is_multiple_of(2).then(|| format!("mesh/img{i}.txt").into()),
        }
    }

    #[test]
    fn empty_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        write_manifest(&[], &p).unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"");
        assert!(read_manifest(&p).unwrap().is_empty());
    }

    #[test]
    fn line_layout() {
        let s = manifest_to_string(&[record(0, -8.25)]).unwrap();
        assert_eq!(
            s,
            "input=input/img0.png\tlabel=gt/img0.png\tangle=-8.25\tsplit=train\tmesh=mesh/img0.txt\n"
        );
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let good = manifest_to_string(&[record(1, 2.0)]).unwrap();
        for bad in [
            "input=a\tlabel=b\tangle=x\tsplit=train",
            "input=a\tlabel=b\tangle=1\tsplit=val",
            "label=b\tinput=a\tangle=1\tsplit=train",
            "input=a\tlabel=b\tangle=1",
            "input=a\tlabel=b\tangle=1\tsplit=train\tmesh=m\textra=1",
            "input=a\tlabel=b\tangle=inf\tsplit=train",
            "garbage",
        ] {
            let text = format!("{good}\n{bad}\n");
            match parse_manifest(&text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, 3, "{bad}"),
                other => panic!("{bad}: {other:?}"),
            }
        }
    }

    #[test]
    fn rejects_unwritable_values() {
        let mut r = record(0, 1.5);
        r.input = "a\tb.png".into();
        assert!(manifest_to_string(&[r]).is_err());
    }

    #[test]
    fn split_is_exactly_nine_to_one() {
        for (n, expect) in [(1000, 100), (60, 6), (10, 1), (0, 0)] {
            let mut rs: Vec<_> = (0..n).map(|i| record(i, 3.0)).collect();
            assign_splits(&mut rs, 7);
            assert_eq!(rs.iter().filter(|r| r.split == Split::Test).count(), expect);
        }
    }

    #[test]
    fn split_independent_of_order_and_seeded() {
        let mut a: Vec<_> = (0..200).map(|i| record(i, 3.0)).collect();
        let mut b: Vec<_> = a.iter().rev().cloned().collect();
        assign_splits(&mut a, 11);
        assign_splits(&mut b, 11);
        b.reverse();
        assert_eq!(a, b);
        let mut c = a.clone();
        assign_splits(&mut c, 12);
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn round_trip_preserves_fields(angles in proptest::collection::vec(-10.0f64..10.0, 0..40)) {
            let mut rs: Vec<_> = angles.iter().enumerate().map(|(i, &a)| record(i, a)).collect();
            assign_splits(&mut rs, 3);
            let back = parse_manifest(&manifest_to_string(&rs).unwrap()).unwrap();
            prop_assert_eq!(back.len(), rs.len());
            for (x, y) in back.iter().zip(&rs) {
                prop_assert_eq!(x.angle.to_bits(), y.angle.to_bits());
                prop_assert_eq!(x, y);
            }
        }
    }
}
