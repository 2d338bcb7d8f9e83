//! Rectangular numeric result tables with CSV and JSON writers.
//!
//! Every command produces a [`ResultTable`]: named columns, row-major `f64`
//! data and a metadata block echoing the effective configuration. CSV output
//! is RFC-4180 style ('.' decimal separator, quoting only where required)
//! with 17 significant digits so values round-trip exactly; an empty cell
//! marks an infeasible entry (stored as NaN). JSON output carries the
//! metadata block alongside the data.

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Metadata attached to every table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableMetadata {
    /// Tool version string.
    pub version: String,
    /// Echo of the effective configuration that produced the table.
    pub config: Value,
}

/// A rectangular table of numeric results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultTable {
    /// Column names, one per cell in each row.
    pub columns: Vec<String>,
    /// Row-major data; NaN marks an infeasible cell.
    pub rows: Vec<Vec<f64>>,
    /// Version string and configuration echo.
    pub metadata: TableMetadata,
}

impl ResultTable {
    /// Empty table with the given column names and configuration echo.
    pub fn new(columns: &[&str], config: Value) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metadata: TableMetadata {
                version: env!("CARGO_PKG_VERSION").to_string(),
                config,
            },
        }
    }

    /// Appends a row, enforcing rectangularity.
    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            bail!(
                "row has {} cells but the table has {} columns",
                row.len(),
                self.columns.len()
            );
        }
        self.rows.push(row);
        Ok(())
    }

    /// Serializes the data block (header + rows) as CSV. Metadata is not
    /// embedded; use JSON output when the configuration echo is needed.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            &self
                .columns
                .iter()
                .map(|c| quote_csv(c))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for row in &self.rows {
            out.push_str(
                &row.iter()
                    .map(|&v| format_cell(v))
                    .collect::<Vec<_>>()
                    .join(","),
            );
            out.push('\n');
        }
        out
    }

    /// Serializes the full table (metadata included) as pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Formats one cell: 17 significant digits, empty for infeasible (NaN),
/// `inf`/`-inf` for unbounded quantities.
pub fn format_cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

/// Parses a cell written by [`format_cell`].
pub fn parse_cell(text: &str) -> Result<f64> {
    if text.is_empty() {
        return Ok(f64::NAN);
    }
    Ok(text.parse::<f64>()?)
}

fn quote_csv(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Parses a CSV data block written by [`ResultTable::to_csv`] back into
/// column names and rows. Only the simple subset the writer emits is
/// accepted (no embedded separators in numeric cells).
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let columns: Vec<String> = split_csv_line(header);
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cells = split_csv_line(line);
        if cells.len() != columns.len() {
            bail!(
                "ragged CSV row: {} cells, expected {}",
                cells.len(),
                columns.len()
            );
        }
        rows.push(
            cells
                .iter()
                .map(|c| parse_cell(c))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok((columns, rows))
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut in_quotes = false;
    let mut chars = line.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '"' if in_quotes && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' => in_quotes = !in_quotes,
            ',' if !in_quotes => {
                fields.push(std::mem::take(&mut cur));
            }
            _ => cur.push(ch),
        }
    }
    fields.push(cur);
    fields
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_round_trips_numbers_and_markers() {
        let mut t = ResultTable::new(&["x", "y"], json!({}));
        t.push_row(vec![1.0 / 3.0, f64::NAN]).unwrap();
        t.push_row(vec![f64::INFINITY, -2.5e-300]).unwrap();
        let (cols, rows) = parse_csv(&t.to_csv()).unwrap();
        assert_eq!(cols, vec!["x", "y"]);
        assert_eq!(rows[0][0], 1.0 / 3.0);
        assert!(rows[0][1].is_nan());
        assert!(rows[1][0].is_infinite());
        assert_eq!(rows[1][1], -2.5e-300);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = ResultTable::new(&["x", "y"], json!({}));
        assert!(t.push_row(vec![1.0]).is_err());
    }

    #[test]
    fn quoting_escapes_embedded_characters() {
        let t = ResultTable::new(&["a,b", "c\"d"], json!({}));
        let csv = t.to_csv();
        assert!(csv.starts_with("\"a,b\",\"c\"\"d\"\n"));
        let (cols, _) = parse_csv(&csv).unwrap();
        assert_eq!(cols, vec!["a,b", "c\"d"]);
    }
}
