//! Atomic file output: nothing appears at the target path until every byte
//! is written.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::Value;
use tempfile::{Builder, NamedTempFile};

use crate::CliError;

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize to JSON");
    s.push('\n');
    s
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn parent(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

pub fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    let mut tmp = NamedTempFile::new_in(parent(path)).map_err(|e| io(path, e))?;
    tmp.write_all(body.as_bytes()).map_err(|e| io(path, e))?;
    tmp.persist(path).map_err(|e| io(path, e.error))?;
    Ok(())
}

/// Writes every file into a fresh sibling directory, then renames it onto
/// `dir`. An existing `dir` must be empty.
pub fn write_dir(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| io(dir, e))?;
        if entries.next().is_some() {
            return Err(io(dir, "output directory exists and is not empty"));
        }
        fs::remove_dir(dir).map_err(|e| io(dir, e))?;
    }
    let staging = Builder::new().prefix(".gmeasure-").tempdir_in(parent(dir)).map_err(|e| io(dir, e))?;
    for (name, body) in files {
        fs::write(staging.path().join(name), body).map_err(|e| io(dir, e))?;
    }
    fs::rename(staging.keep(), dir).map_err(|e| io(dir, e))?;
    Ok(())
}
