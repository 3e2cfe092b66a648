//! Report serialization: the versioned JSON envelope with the resolved
//! configuration and its content hash, CSV tables in full precision, and the
//! machine-readable error document.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// Schema tag carried by every JSON document.
pub const SCHEMA: &str = "qnm-report/1";

/// Hex SHA-256 of the canonical JSON form of the configuration.
pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_string(config).expect("configuration serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        write!(s, "{b:02x}").expect("writing to a String");
    }
    s
}

/// Wraps a command result in the report envelope.
pub fn envelope<T: Serialize>(command: &str, config: &RunConfig, result: &T) -> Result<Value, CliError> {
    let result = serde_json::to_value(result).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(json!({
        "schema": SCHEMA,
        "command": command,
        "config_hash": config_hash(config),
        "config": config,
        "result": result,
    }))
}

/// The error document printed on failure.
pub fn error_document(err: &CliError) -> Value {
    json!({
        "schema": SCHEMA,
        "error": { "kind": err.kind(), "message": err.to_string() },
    })
}

/// A CSV table whose numeric cells are already formatted.
#[derive(Debug, Clone, Default)]
pub struct Table {
    /// Column names.
    pub header: Vec<String>,
    /// Rows.
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Empty table with the given columns.
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row.
    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Renders the table as CSV text.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| CliError::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `<command>.json` (and `<command>.csv`) into `dir`.
pub fn write_artifacts(dir: &Path, command: &str, doc: &Value, table: Option<&Table>) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let text = serde_json::to_string_pretty(doc).map_err(|e| CliError::Io(e.to_string()))?;
    let json_path = dir.join(format!("{command}.json"));
    std::fs::write(&json_path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", json_path.display())))?;
    if let Some(t) = table {
        let csv_path = dir.join(format!("{command}.csv"));
        std::fs::write(&csv_path, t.to_csv()?).map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
    }
    Ok(())
}
