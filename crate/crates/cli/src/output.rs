//! Result rows and their CSV / JSON-lines encodings.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Bumped whenever columns change meaning or are removed.
pub const SCHEMA_VERSION: i64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// `.jsonl` and `.json` select JSON lines, anything else CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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
    /// Shortest text that parses back to the same value.
    fn csv_text(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Int(v) => (*v).into(),
            Cell::Bool(v) => (*v).into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// Ordered (column, value) pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row(pub Vec<(String, Cell)>);

impl Row {
    pub fn new() -> Self {
        Row(vec![("schema_version".into(), Cell::Int(SCHEMA_VERSION))])
    }

    pub fn push(&mut self, name: impl Into<String>, v: impl Into<Cell>) -> &mut Self {
        self.0.push((name.into(), v.into()));
        self
    }

    pub fn columns(&self) -> Vec<&str> {
        self.0.iter().map(|(k, _)| k.as_str()).collect()
    }

    #[cfg(test)]
    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }
}

/// Writes rows to a file or stdout in one format. CSV headers come from the
/// first row; later rows must have the same columns.
pub struct RowWriter {
    format: Format,
    sink: Box<dyn Write>,
    header: Option<Vec<String>>,
    label: String,
}

impl RowWriter {
    pub fn open(path: Option<&PathBuf>, format: Format) -> CliResult<Self> {
        let (sink, label): (Box<dyn Write>, String) = match path {
            Some(p) => {
                let f = std::fs::File::create(p).map_err(|e| CliError::io(p.display().to_string(), e))?;
                (Box::new(std::io::BufWriter::new(f)), p.display().to_string())
            }
            None => (Box::new(std::io::BufWriter::new(std::io::stdout())), "stdout".into()),
        };
        Ok(RowWriter { format, sink, header: None, label })
    }

    pub fn write(&mut self, row: &Row) -> CliResult<()> {
        let io = |e: std::io::Error, l: &str| CliError::io(l.to_string(), e);
        match self.format {
            Format::Csv => {
                let cols: Vec<String> = row.columns().into_iter().map(String::from).collect();
                match &self.header {
                    None => {
                        self.sink.write_all(&csv_line(&cols)?).map_err(|e| io(e, &self.label))?;
                        self.header = Some(cols);
                    }
                    Some(h) if *h != cols => {
                        return Err(CliError::Usage(format!("row columns {cols:?} differ from header {h:?}")));
                    }
                    Some(_) => {}
                }
                let cells: Vec<String> = row.0.iter().map(|(_, c)| c.csv_text()).collect();
                self.sink.write_all(&csv_line(&cells)?).map_err(|e| io(e, &self.label))?;
            }
            Format::Jsonl => {
                let obj: serde_json::Map<String, serde_json::Value> =
                    row.0.iter().map(|(k, c)| (k.clone(), c.json())).collect();
                let line = serde_json::to_string(&obj).map_err(|e| CliError::Usage(e.to_string()))?;
                writeln!(self.sink, "{line}").map_err(|e| io(e, &self.label))?;
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.sink.flush().map_err(|e| CliError::io(self.label.clone(), e))
    }
}

fn csv_line(fields: &[String]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields).map_err(|e| CliError::Usage(e.to_string()))?;
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for v in [0.1, -1e-300, 1.0 / 3.0, 6.02e23, 0.0] {
            let s = Cell::Float(v).csv_text();
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(Cell::Empty.csv_text(), "");
        assert_eq!(Cell::Float(f64::NAN).json(), serde_json::Value::Null);
    }

    #[test]
    fn csv_quotes_embedded_commas() {
        let line = csv_line(&["a".into(), "{\"x\":[1,2]}".into()]).unwrap();
        assert_eq!(String::from_utf8(line).unwrap(), "a,\"{\"\"x\"\":[1,2]}\"\n");
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(Format::from_path(Path::new("r.jsonl")), Format::Jsonl);
        assert_eq!(Format::from_path(Path::new("r.csv")), Format::Csv);
        assert_eq!(Format::from_path(Path::new("r")), Format::Csv);
    }
}
