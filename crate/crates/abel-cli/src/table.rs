//! CSV tables of finite doubles with a header row.
//!
//! Values are written with 17 significant decimal digits, so a write/read
//! round trip reproduces every finite double bit-exactly.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// A column-oriented numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: Vec<String>, columns: Vec<Vec<f64>>) -> Self {
        Self { headers, columns }
    }

    /// Rows in the table.
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The column with the given header, if present.
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Read a header-and-doubles CSV file. Ragged rows, non-numeric cells and
/// non-finite values are parse errors carrying the offending line number.
pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => match e.into_kind() {
                csv::ErrorKind::Io(io) => io_err(path, io),
                _ => unreachable!(),
            },
            _ => CliError::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: e.to_string(),
            },
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut columns = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: match e.kind() {
                    csv::ErrorKind::UnequalLengths {
                        expected_len, len, ..
                    } => {
                        format!("ragged row: {len} fields, expected {expected_len}")
                    }
                    _ => e.to_string(),
                },
            }
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        for (i, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("not a number: {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("non-finite value: {field:?}"),
                });
            }
            columns[i].push(value);
        }
    }
    Ok(Table { headers, columns })
}

/// Format a double with 17 significant digits (round-trip exact).
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn render(table: &Table) -> Result<String, CliError> {
    let rows = table.len();
    for (header, column) in table.headers.iter().zip(&table.columns) {
        if column.len() != rows {
            return Err(CliError::Usage(format!(
                "column {header:?} has {} rows, expected {rows}",
                column.len()
            )));
        }
        if let Some(bad) = column.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Usage(format!(
                "column {header:?} holds a non-finite value {bad}"
            )));
        }
    }
    let mut out = String::new();
    out.push_str(&table.headers.join(","));
    out.push('\n');
    for row in 0..rows {
        let line: Vec<String> = table.columns.iter().map(|c| format_value(c[row])).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Write the table as CSV to a file.
pub fn write_table(path: &Path, table: &Table) -> Result<(), CliError> {
    let rendered = render(table)?;
    std::fs::write(path, rendered).map_err(|e| io_err(path, e))
}

/// Write the table as CSV to an arbitrary writer (used for stdout).
pub fn write_table_to(writer: &mut dyn Write, table: &Table) -> Result<(), CliError> {
    let rendered = render(table)?;
    writer
        .write_all(rendered.as_bytes())
        .map_err(|e| io_err(&PathBuf::from("<stdout>"), e))
}
