//! CSV and JSON writers. Every file is stamped with the tool version and the
//! SHA-256 of the configuration text.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: String,
    pub config_sha256: String,
    pub deplete: bool,
}

impl Meta {
    pub fn new(command: &str, config_name: &str, config_text: &str, deplete: bool) -> Self {
        Self {
            tool: "psr-sim",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config_name.to_string(),
            config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
            deplete,
        }
    }

    fn comment_lines(&self) -> Vec<String> {
        vec![
            format!("# {} {}", self.tool, self.version),
            format!("# command: {}", self.command),
            format!("# config: {}", self.config),
            format!("# config-sha256: {}", self.config_sha256),
            format!("# deplete: {}", self.deplete),
        ]
    }
}

/// A rectangular table with a header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip decimal form, so equal values print identically.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

/// Everything a command emits: one or more named CSV tables and a JSON body.
pub struct Report {
    pub tables: Vec<(Option<&'static str>, Table)>,
    pub json: Value,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

/// `out.csv` with suffix `gl` becomes `out.gl.csv`.
pub fn suffixed(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{suffix}"),
    };
    out.with_file_name(name)
}

pub fn write_csv(path: &Path, meta: &Meta, table: &Table) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    for line in meta.comment_lines() {
        writeln!(w, "{line}").map_err(|e| io_err(path, e))?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(&table.header)
        .map_err(|e| io_err(path, e))?;
    for row in &table.rows {
        csv.write_record(row).map_err(|e| io_err(path, e))?;
    }
    csv.flush().map_err(|e| io_err(path, e))
}

pub fn write_json(path: &Path, meta: &Meta, data: &Value) -> Result<(), CliError> {
    let body = serde_json::json!({ "meta": meta, "data": data });
    let mut text = serde_json::to_string_pretty(&body).map_err(|e| io_err(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Paths of the files written.
pub fn emit(
    out: &Path,
    json: bool,
    meta: &Meta,
    report: &Report,
) -> Result<Vec<PathBuf>, CliError> {
    if json {
        write_json(out, meta, &report.json)?;
        return Ok(vec![out.to_path_buf()]);
    }
    let mut written = Vec::new();
    for (suffix, table) in &report.tables {
        let path = match suffix {
            Some(s) => suffixed(out, s),
            None => out.to_path_buf(),
        };
        write_csv(&path, meta, table)?;
        written.push(path);
    }
    Ok(written)
}
