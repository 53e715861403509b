//! CSV and manifest writing with fixed formatting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// 17 significant digits in scientific notation.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_table(dir: &Path, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
    let mut text = header.join(",");
    text.push('\n');
    for (i, row) in rows.iter().enumerate() {
        if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Internal(format!(
                "{name}: non-finite {} in row {}",
                header[bad],
                i + 1
            )));
        }
        let cells: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Two-column `quantity,value` table.
pub fn write_summary(dir: &Path, name: &str, entries: &[(&str, f64)]) -> Result<PathBuf> {
    let mut text = String::from("quantity,value\n");
    for (key, v) in entries {
        if !v.is_finite() {
            return Err(Error::Internal(format!("{name}: non-finite {key}")));
        }
        let _ = writeln!(text, "{key},{}", fmt(*v));
    }
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn write_manifest(dir: &Path, experiment: &str, config_toml: &str, files: &[PathBuf]) -> Result<PathBuf> {
    let config: toml::Table = toml::from_str(config_toml).map_err(|e| Error::Internal(e.to_string()))?;
    let mut root = toml::Table::new();
    root.insert("library_version".into(), env!("CARGO_PKG_VERSION").into());
    root.insert("experiment".into(), experiment.into());
    let names: Vec<toml::Value> = files
        .iter()
        .filter_map(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned().into())
        .collect();
    root.insert("files".into(), toml::Value::Array(names));
    root.insert("config".into(), toml::Value::Table(config));
    let text = toml::to_string(&root).map_err(|e| Error::Internal(e.to_string()))?;
    let path = dir.join("manifest.toml");
    std::fs::write(&path, text)?;
    Ok(path)
}
