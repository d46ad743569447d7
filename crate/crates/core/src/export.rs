//! Deterministic file output shared by the CLI commands.
//!
//! Floats in CSV use Rust's shortest round-trip `{:e}` form and JSON goes
//! through `serde_json`, so identical inputs give byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernellab::csv_error;

/// Shortest round-trip scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

/// Create `dir` (and parents) if missing.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_context(e, dir))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(format!("json encoding: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_context(e, path))
}

/// Write a header and rows of already formatted cells.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| io_context(e, path))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Open `path` for buffered writing.
pub fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    Ok(std::io::BufWriter::new(fs::File::create(path).map_err(|e| io_context(e, path))?))
}

fn io_context(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Every regular file below `root` as `(relative path, bytes)`, sorted.
pub fn snapshot_tree(root: &Path) -> Result<Vec<(PathBuf, Vec<u8>)>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(PathBuf, Vec<u8>)>) -> Result<()> {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path.strip_prefix(root).expect("walk stays below root").to_path_buf();
                out.push((rel, fs::read(&path)?));
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(root, root, &mut out)?;
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -2.5e-300, 1.0 / 3.0, 6.02214076e23, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn tables_and_snapshots() {
        let dir = tempfile::tempdir().unwrap();
        ensure_dir(&dir.path().join("a/b")).unwrap();
        write_table(&dir.path().join("a/b/t.csv"), &["x", "y"], &[vec!["1".into(), "2".into()]]).unwrap();
        write_json(&dir.path().join("r.json"), &[1.5, 2.0]).unwrap();
        let snap = snapshot_tree(dir.path()).unwrap();
        assert_eq!(snap.len(), 2);
        assert_eq!(snap[0].0, PathBuf::from("a/b/t.csv"));
        assert_eq!(snap[0].1, b"x,y\n1,2\n");
        assert!(String::from_utf8(snap[1].1.clone()).unwrap().ends_with("]\n"));
    }
}
