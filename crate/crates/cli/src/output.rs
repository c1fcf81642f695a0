use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn exact(&self) -> String {
        match self {
            // -0 prints as 0
            Cell::Num(v) => format!("{}", v + 0.0),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn pretty(&self) -> String {
        match self {
            Cell::Num(v) if *v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e6) => format!("{v:.6e}"),
            Cell::Num(v) => format!("{:.6}", v + 0.0),
            other => other.exact(),
        }
    }
}

/// Rendered result of one command: a table for csv/table output plus the
/// structured value for json output.
#[derive(Debug, Clone)]
pub struct Report {
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub json: Value,
}

impl Report {
    pub fn new<T: Serialize>(columns: &[&str], json: &T) -> Self {
        Self {
            notes: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            json: serde_json::to_value(json).expect("serializable report"),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn render(&self, format: Format, metadata: Option<&Value>) -> String {
        match format {
            Format::Csv => self.csv(metadata),
            Format::Json => self.json(metadata),
            Format::Table => self.table(metadata),
        }
    }

    fn csv(&self, metadata: Option<&Value>) -> String {
        let mut s = String::from("# times in units of tau_S\n");
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        if let Some(m) = metadata {
            let _ = writeln!(s, "# metadata: {m}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| csv_field(&c.exact())).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    fn json(&self, metadata: Option<&Value>) -> String {
        let mut v = serde_json::json!({
            "time_unit": "tau_S",
            "result": self.json,
        });
        if !self.notes.is_empty() {
            v["notes"] = serde_json::json!(self.notes);
        }
        if let Some(m) = metadata {
            v["metadata"] = m.clone();
        }
        let mut s = serde_json::to_string_pretty(&v).expect("json value");
        s.push('\n');
        s
    }

    fn table(&self, metadata: Option<&Value>) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::pretty).collect())
            .collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|i| {
                cells
                    .iter()
                    .map(|r| r[i].len())
                    .chain([self.columns[i].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |items: &[String]| -> String {
            items
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut s = String::new();
        let _ = writeln!(s, "{}", line(&self.columns));
        let _ = writeln!(
            s,
            "{}",
            widths
                .iter()
                .map(|w| "-".repeat(*w))
                .collect::<Vec<_>>()
                .join("  ")
        );
        for r in &cells {
            let _ = writeln!(s, "{}", line(r));
        }
        for n in &self.notes {
            let _ = writeln!(s, "{n}");
        }
        if let Some(m) = metadata {
            let _ = writeln!(s, "metadata: {m}");
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
