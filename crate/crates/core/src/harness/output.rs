//! CSV tables and JSON sidecars.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Header of the γ-sweep table.
pub const SWEEP_HEADER: [&str; 9] =
    ["gamma", "method", "trials", "ser", "ser_ci95", "nmse", "papr_red_db_mean", "resid_var", "wall_ms_median"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

/// `results.csv` → `results.json`; a `.json` table gets `.meta.json`.
pub fn sidecar_path(table: &Path) -> PathBuf {
    if table.extension().is_some_and(|e| e == "json") {
        table.with_extension("meta.json")
    } else {
        table.with_extension("json")
    }
}

/// Formats an optional float, empty when absent.
pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes a header and string rows as CSV.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Writes pretty-printed JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = File::create(path).map_err(io_err(path))?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidArgument(format!("JSON encoding failed: {e}")))?;
    file.write_all(text.as_bytes()).map_err(io_err(path))?;
    file.write_all(b"\n").map_err(io_err(path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar_path(Path::new("out/r.csv")), PathBuf::from("out/r.json"));
        assert_eq!(sidecar_path(Path::new("r")), PathBuf::from("r.json"));
        assert_eq!(sidecar_path(Path::new("r.json")), PathBuf::from("r.meta.json"));
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/t.csv");
        write_csv(&p, &["a", "b"], &[vec!["1".into(), opt(None)]]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\n1,\n");
    }

    #[test]
    fn unwritable_path_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = write_csv(&blocker.join("t.csv"), &["a"], &[]).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
