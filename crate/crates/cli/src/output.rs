use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

/// Column-oriented result of one run.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// Columns printed as integers (chain sizes).
    pub integer_columns: Vec<&'static str>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            integer_columns: Vec::new(),
        }
    }

    fn is_integer(&self, col: usize) -> bool {
        self.integer_columns.contains(&self.columns[col])
    }
}

/// 17 significant digits, '.' decimal point, independent of locale.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.columns).map_err(CliError::io)?;
    for row in &table.rows {
        let fields = row.iter().enumerate().map(|(i, &x)| {
            if table.is_integer(i) {
                format!("{}", x as u64)
            } else {
                format_float(x)
            }
        });
        w.write_record(fields).map_err(CliError::io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// JSON array with one object per row, keys in column order.
pub fn to_json(table: &Table) -> Result<Vec<u8>, CliError> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (i, (&name, &x)) in table.columns.iter().zip(row).enumerate() {
                let v = if table.is_integer(i) { Value::from(x as u64) } else { Value::from(x) };
                obj.insert(name.to_string(), v);
            }
            Value::Object(obj)
        })
        .collect();
    let mut text = serde_json::to_vec_pretty(&rows).map_err(CliError::io)?;
    text.push(b'\n');
    Ok(text)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    #[serde(flatten)]
    config: &'a RunConfig,
    columns: &'a [&'static str],
    rows: usize,
    #[serde(skip_serializing_if = "Value::is_null")]
    summary: Value,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the data (file or standard output) and the manifest (next to the
/// file, or standard error).
pub fn emit(config: &RunConfig, table: &Table, summary: Value) -> Result<(), CliError> {
    let data = match config.format {
        Format::Csv => to_csv(table)?,
        Format::Json => to_json(table)?,
    };
    let manifest = Manifest {
        tool: "squeezechain",
        version: env!("CARGO_PKG_VERSION"),
        config,
        columns: &table.columns,
        rows: table.rows.len(),
        summary,
    };
    let mut manifest_text = serde_json::to_vec_pretty(&manifest).map_err(CliError::io)?;
    manifest_text.push(b'\n');
    match &config.output {
        Some(path) => {
            std::fs::write(path, &data).map_err(CliError::io)?;
            std::fs::write(manifest_path(path), &manifest_text).map_err(CliError::io)?;
        }
        None => {
            std::io::stdout().write_all(&data).map_err(CliError::io)?;
            std::io::stderr().write_all(&manifest_text).map_err(CliError::io)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        let mut t = Table::new(vec!["N", "T_rev"]);
        t.integer_columns.push("N");
        t.rows.push(vec![80.0, 50.125]);
        t.rows.push(vec![100.0, 0.1]);
        t
    }

    #[test]
    fn csv_round_trips_doubles() {
        let text = String::from_utf8(to_csv(&table()).unwrap()).unwrap();
        assert_eq!(text, "N,T_rev\n80,5.0125000000000000e1\n100,1.0000000000000001e-1\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn json_holds_the_same_numbers() {
        let v: Vec<serde_json::Value> = serde_json::from_slice(&to_json(&table()).unwrap()).unwrap();
        assert_eq!(v[0]["N"], 80);
        assert_eq!(v[1]["T_rev"].as_f64().unwrap(), 0.1);
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("out/a.csv")), PathBuf::from("out/a.csv.manifest.json"));
    }
}
