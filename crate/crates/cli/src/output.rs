//! CSV and JSON writers. Files are written to a temporary sibling and
//! renamed into place; every output carries the resolved configuration.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sink {
    Stdout(Format),
    File(PathBuf, Format),
}

impl Sink {
    /// `--out csv` and `--out json` select stdout; anything else is a
    /// path whose extension picks the format.
    pub fn parse(out: Option<&str>, default: Format) -> Sink {
        match out {
            None | Some("-") => Sink::Stdout(default),
            Some("csv") => Sink::Stdout(Format::Csv),
            Some("json") => Sink::Stdout(Format::Json),
            Some(p) => {
                let path = PathBuf::from(p);
                let fmt = match path.extension().and_then(|e| e.to_str()) {
                    Some("csv") => Format::Csv,
                    Some("json") => Format::Json,
                    _ => default,
                };
                Sink::File(path, fmt)
            }
        }
    }

    pub fn format(&self) -> Format {
        match self {
            Sink::Stdout(f) | Sink::File(_, f) => *f,
        }
    }
}

/// Replaces `path` with `bytes` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| CliError::from(e.error))?;
    Ok(())
}

fn emit(sink: &Sink, bytes: Vec<u8>) -> Result<(), CliError> {
    match sink {
        Sink::Stdout(_) => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
            Ok(())
        }
        Sink::File(p, _) => write_atomic(p, &bytes),
    }
}

/// A tabular result that can be rendered either way.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj = self
                    .header
                    .iter()
                    .zip(r)
                    .map(|(h, v)| (h.clone(), cell_value(v)))
                    .collect::<serde_json::Map<_, _>>();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

fn cell_value(s: &str) -> Value {
    if let Ok(i) = s.parse::<i64>() {
        return json!(i);
    }
    match s.parse::<f64>() {
        Ok(f) if f.is_finite() => json!(f),
        _ => json!(s),
    }
}

pub fn num(v: f64) -> String {
    format!("{v:e}")
}

fn csv_bytes(resolved: &Value, table: &Table) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    writeln!(buf, "# {resolved}")?;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let csv_err = |e: csv::Error| CliError::Config(format!("csv: {e}"));
        w.write_record(&table.header).map_err(csv_err)?;
        for r in &table.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

fn json_bytes(resolved: &Value, result: Value) -> Result<Vec<u8>, CliError> {
    let doc = json!({ "config": resolved, "result": result });
    let mut s = serde_json::to_vec_pretty(&doc)
        .map_err(|e| CliError::Numeric(format!("serializing the report: {e}")))?;
    s.push(b'\n');
    Ok(s)
}

pub fn write_table(sink: &Sink, resolved: &Value, table: &Table) -> Result<(), CliError> {
    let bytes = match sink.format() {
        Format::Csv => csv_bytes(resolved, table)?,
        Format::Json => json_bytes(resolved, table.to_json())?,
    };
    emit(sink, bytes)
}

/// Structured results; a CSV request gets a single `json` column.
pub fn write_report<T: Serialize>(sink: &Sink, resolved: &Value, report: &T) -> Result<(), CliError> {
    let value = serde_json::to_value(report)
        .map_err(|e| CliError::Numeric(format!("serializing the report: {e}")))?;
    let bytes = match sink.format() {
        Format::Json => json_bytes(resolved, value)?,
        Format::Csv => {
            let mut t = Table::new(&["json"]);
            t.push(vec![value.to_string()]);
            csv_bytes(resolved, &t)?
        }
    };
    emit(sink, bytes)
}
