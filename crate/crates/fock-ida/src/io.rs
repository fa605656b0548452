//! Deterministic text artifacts: fixed-layout CSV tables and pretty JSON.
//!
//! Every number is rendered with 17 significant digits (`{:.16e}`), which is
//! enough to reproduce an `f64` exactly, so a repeated run with the same
//! configuration produces byte-identical files. Lines always end in a single
//! `\n`.

use std::path::Path;

use serde::Serialize;

use crate::ida::OscillationField;
use crate::{Error, Result};

/// Render a float with 17 significant digits; non-finite values get fixed
/// lowercase spellings so the CSV stays deterministic and parseable.
pub fn fmt_value(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Render an integer-valued cell.
pub fn fmt_int(x: usize) -> String {
    x.to_string()
}

/// Render a boolean as 0/1.
pub fn fmt_bool(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

/// Make free text safe for an unquoted CSV cell.
pub fn sanitize(text: &str) -> String {
    text.replace(',', ";").replace(['\n', '\r'], " ")
}

/// A CSV table with a fixed header; rows must match the header width.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    /// Start a table with the given column names.
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Column names.
    pub fn header(&self) -> &[String] {
        &self.header
    }

    /// Rows pushed so far.
    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Append a row; its width must match the header.
    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width {} does not match header width {}",
            row.len(),
            self.header.len()
        );
        self.rows.push(row);
    }

    /// Serialize with comma separators and LF line endings.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Write to a file, creating parent directories.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.render())
    }
}

/// Write UTF-8 text, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text.as_bytes())?;
    Ok(())
}

/// Write a value as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Export a sampled field as a (re, im, value) CSV.
pub fn write_field_csv(path: &Path, field: &OscillationField) -> Result<()> {
    if field.centers.len() != field.values.len() {
        return Err(Error::InvalidParameter(format!(
            "field {} has {} centers but {} values",
            field.label,
            field.centers.len(),
            field.values.len()
        )));
    }
    let mut table = CsvTable::new(&["re_z", "im_z", "value"]);
    for (c, &v) in field.centers.iter().zip(&field.values) {
        table.push_row(vec![fmt_value(c.re), fmt_value(c.im), fmt_value(v)]);
    }
    table.write(path)
}
