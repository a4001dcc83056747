//! Artifact writing: CSV tables and JSON reports, each self-describing.
//!
//! Every file opens with the tool version, the command, the seed (when the
//! run used one), and the fully resolved configuration as one JSON object —
//! enough to reproduce the artifact exactly. A wall-clock line is included
//! only when `--no-timestamp` is absent, so repeated runs with
//! `--no-timestamp` are byte-identical.

use crate::error::CliError;
use serde_json::Value;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const TOOL: &str = concat!("gmlab ", env!("CARGO_PKG_VERSION"));

/// The self-description block shared by all artifacts.
pub struct Meta {
    pub command: &'static str,
    pub seed: Option<u64>,
    /// Fully resolved configuration of the run.
    pub config: Value,
    /// Unix seconds, absent under `--no-timestamp`.
    pub written_unix: Option<u64>,
}

impl Meta {
    pub fn new(
        command: &'static str,
        config: impl serde::Serialize,
        seed: Option<u64>,
        no_timestamp: bool,
    ) -> Result<Self, CliError> {
        let config = serde_json::to_value(config)
            .map_err(|e| CliError::Config(format!("cannot serialize config: {e}")));
        let written_unix = if no_timestamp {
            None
        } else {
            Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
        };
        Ok(Meta { command, seed, config: config?, written_unix })
    }

    fn comment_lines(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# tool: {TOOL}");
        let _ = writeln!(s, "# command: {}", self.command);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed: {seed}");
        }
        let _ = writeln!(s, "# config: {}", self.config);
        if let Some(t) = self.written_unix {
            let _ = writeln!(s, "# written-unix: {t}");
        }
        s
    }

    fn json_object(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("tool".into(), Value::String(TOOL.into()));
        obj.insert("command".into(), Value::String(self.command.into()));
        if let Some(seed) = self.seed {
            obj.insert("seed".into(), Value::from(seed));
        }
        obj.insert("config".into(), self.config.clone());
        if let Some(t) = self.written_unix {
            obj.insert("written-unix".into(), Value::from(t));
        }
        Value::Object(obj)
    }
}

/// Resolve `<out>/<stem>.<ext>`, creating the output directory if needed.
pub fn artifact_path(out: &Path, stem: &str, ext: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;
    Ok(out.join(format!("{stem}.{ext}")))
}

/// Write a CSV artifact: `#` metadata lines, one plain header row, then the
/// data rows. Floats are rendered with Rust's shortest round-trip format, so
/// the body is bit-faithful to the computed values.
pub fn write_csv(
    path: &Path,
    meta: &Meta,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let mut body = meta.comment_lines();
    body.push_str(&columns.join(","));
    body.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        body.push_str(&row.join(","));
        body.push('\n');
    }
    std::fs::write(path, body)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Write a JSON artifact `{"meta": ..., "result": ...}` with sorted keys and
/// a trailing newline.
pub fn write_json(path: &Path, meta: &Meta, result: Value) -> Result<(), CliError> {
    let mut obj = serde_json::Map::new();
    obj.insert("meta".into(), meta.json_object());
    obj.insert("result".into(), result);
    let mut text = serde_json::to_string_pretty(&Value::Object(obj))
        .map_err(|e| CliError::Config(format!("cannot serialize artifact: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Shortest round-trip decimal rendering (what the CSV rows use).
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
