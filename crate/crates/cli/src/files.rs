//! Directory conventions and small JSON helpers.
//!
//! Batch commands pair files by stem: `gt_<stem>.pgm`, `sem_<stem>.pgm`,
//! `pred_<stem>.pgm`, `dist_<stem>.mgf` and `bnd_<stem>.mgf`.

use std::path::{Path, PathBuf};

use morigeo_core::{Error, Result};
use serde_json::Value;

pub fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_error(path: &Path, reason: impl ToString) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

/// Sorted stems of files named `<prefix><stem><suffix>` in `dir`.
pub fn stems(dir: &Path, prefix: &str, suffix: &str) -> Result<Vec<String>> {
    let entries = std::fs::read_dir(dir).map_err(|e| io_error(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| io_error(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if let Some(stem) = name.strip_prefix(prefix).and_then(|n| n.strip_suffix(suffix)) {
            if !stem.is_empty() {
                out.push(stem.to_string());
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn named(dir: &Path, prefix: &str, stem: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{prefix}{stem}{suffix}"))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| format_error(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| format_error(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Reads a JSON object whose keys are integer ids, such as `{"1": 0.9}`.
pub fn read_id_map<T>(path: &Path, convert: impl Fn(&Value) -> Option<T>) -> Result<Vec<(u16, T)>> {
    let value = read_json(path)?;
    let Value::Object(map) = value else {
        return Err(format_error(path, "expected a JSON object"));
    };
    map.iter()
        .map(|(k, v)| {
            let id: u16 = k
                .parse()
                .map_err(|_| format_error(path, format!("key `{k}` is not an id")))?;
            let v = convert(v).ok_or_else(|| format_error(path, format!("bad value for id {id}")))?;
            Ok((id, v))
        })
        .collect()
}
