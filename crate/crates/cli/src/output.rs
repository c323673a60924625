//! Tables and their CSV / JSON encodings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::{meta_map, Format, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn index(&self, column: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == column)
    }

    /// Numeric column; empty or text cells become `None`.
    pub fn column(&self, column: &str) -> Option<Vec<Option<f64>>> {
        let i = self.index(column)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[i] {
                    Cell::Num(x) => Some(x),
                    _ => None,
                })
                .collect(),
        )
    }

    /// Numeric column with every cell filled.
    pub fn values(&self, column: &str) -> Option<Vec<f64>> {
        self.column(column)?.into_iter().collect()
    }

    pub fn text(&self, column: &str) -> Option<Vec<String>> {
        let i = self.index(column)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[i] {
                    Cell::Text(s) => s.clone(),
                    _ => String::new(),
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            &self
                .columns
                .iter()
                .map(|c| csv_field(c))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(x) => write!(out, "{}", format_float(*x)).expect("write to String"),
                    Cell::Text(s) => out.push_str(&csv_field(s)),
                    Cell::Empty => {}
                }
            }
            out.push('\n');
        }
        out
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Num(x) if x.is_finite() => json!(x),
                        Cell::Num(x) => json!(format_float(*x)),
                        Cell::Text(s) => json!(s),
                        Cell::Empty => Value::Null,
                    })
                    .collect()
            })
            .collect();
        json!({ "columns": self.columns, "rows": rows })
    }
}

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Tables produced by one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub tables: Vec<Table>,
}

impl Artifact {
    pub fn single(table: Table) -> Self {
        Self {
            tables: vec![table],
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self, config: &RunConfig) -> String {
        let tables: serde_json::Map<String, Value> = self
            .tables
            .iter()
            .map(|t| (t.name.clone(), t.to_json()))
            .collect();
        let doc = json!({
            "meta": {
                "command": config.command.to_string(),
                "config": meta_map(config),
                "seed": config.seed,
                "version": env!("CARGO_PKG_VERSION"),
            },
            "tables": tables,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("tables serialise");
        s.push('\n');
        s
    }

    /// Output files and their contents. CSV puts the first table at `out`
    /// and each further table beside it as `<stem>_<name>.csv`; without
    /// `out` everything goes to one stream, tables separated by a blank line.
    pub fn render(&self, config: &RunConfig) -> Vec<(Option<PathBuf>, String)> {
        match (config.format, &config.out) {
            (Format::Json, out) => vec![(out.clone(), self.to_json(config))],
            (Format::Csv, None) => {
                let body = self
                    .tables
                    .iter()
                    .map(Table::to_csv)
                    .collect::<Vec<_>>()
                    .join("\n");
                vec![(None, body)]
            }
            (Format::Csv, Some(path)) => self
                .tables
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let p = if i == 0 {
                        path.clone()
                    } else {
                        sibling(path, &t.name)
                    };
                    (Some(p), t.to_csv())
                })
                .collect(),
        }
    }
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}_{name}.{ext}"))
}
