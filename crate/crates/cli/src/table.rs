//! Tabular output shared by every subcommand.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Usage(format!(
                "unknown format \"{other}\" (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// Rounds to 12 significant digits and prints the shortest decimal that
/// reads back as the rounded value.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    match rounded.abs() {
        0.0 => "0".into(),
        a if (1e-5..1e15).contains(&a) => format!("{rounded}"),
        _ => format!("{rounded:e}"),
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format_number(*x),
            Cell::Num(_) => "null".into(),
            Cell::Int(x) => x.to_string(),
            Cell::Text(s) if s.is_empty() => "null".into(),
            Cell::Text(s) => serde_json::to_string(s).expect("strings serialize"),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

/// Header, rows and `key=value` metadata (seed, shot count, ...).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    /// CSV with leading `# key=value` comment lines, or JSON lines where each
    /// object carries the metadata keys first.
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => {
                let mut out = String::new();
                for (k, v) in &self.meta {
                    writeln!(out, "# {k}={v}").expect("writing to a String");
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns).map_err(|e| CliError::Io(e.to_string()))?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv))
                        .map_err(|e| CliError::Io(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
                out.push_str(std::str::from_utf8(&bytes).expect("csv output is UTF-8"));
                Ok(out)
            }
            Format::Json => {
                let mut out = String::new();
                for row in &self.rows {
                    let meta = self.meta.iter().map(|(k, v)| {
                        let value = if v.parse::<u64>().is_ok() {
                            v.clone()
                        } else {
                            serde_json::to_string(v).expect("strings serialize")
                        };
                        (k.as_str(), value)
                    });
                    let cells = self.columns.iter().map(String::as_str).zip(row.iter().map(Cell::json));
                    let fields: Vec<String> = meta
                        .chain(cells)
                        .map(|(k, v)| format!("{}:{v}", serde_json::to_string(k).expect("strings serialize")))
                        .collect();
                    writeln!(out, "{{{}}}", fields.join(",")).expect("writing to a String");
                }
                Ok(out)
            }
        }
    }
}
