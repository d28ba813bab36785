//! Result tables and their CSV and JSON renderings.
//!
//! CSV numbers carry 17 significant digits so that files round-trip exactly.
//! A CSV run writes the main table to the output path and each further block
//! to a sidecar next to it, `<stem>.scalars.csv`, `<stem>.history.csv` and so
//! on. A JSON run writes a single object
//! `{config, scalars, columns, history, ...}`.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value as Json};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Num(v) if v.is_finite() => format!("{v:.16e}"),
            Value::Num(v) => v.to_string(),
            Value::Int(v) => v.to_string(),
            Value::Bool(v) => v.to_string(),
            Value::Text(s) => s.clone(),
            Value::Missing => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Num(v) => serde_json::Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Value::Int(v) => json!(v),
            Value::Bool(v) => json!(v),
            Value::Text(s) => json!(s),
            Value::Missing => Json::Null,
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i32> for Value {
    fn from(v: i32) -> Self {
        Value::Int(v.into())
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Value::Missing, Value::Num)
    }
}

/// Named columns of equal length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<(String, Vec<Value>)>,
}

impl Table {
    pub fn with<V: Into<Value>>(mut self, name: &str, values: impl IntoIterator<Item = V>) -> Self {
        self.columns.push((name.to_owned(), values.into_iter().map(Into::into).collect()));
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.1.len())
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let err = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(self.columns.iter().map(|c| c.0.as_str())).map_err(err)?;
        for i in 0..self.rows() {
            w.write_record(self.columns.iter().map(|c| c.1.get(i).map_or(String::new(), Value::csv)))
                .map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }

    fn json(&self) -> Json {
        let mut map = Map::new();
        for (name, values) in &self.columns {
            map.insert(name.clone(), Json::Array(values.iter().map(Value::json).collect()));
        }
        Json::Object(map)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub scalars: Vec<(String, Value)>,
    pub columns: Table,
    /// Named side tables; `history` is always emitted in JSON.
    pub sidecars: Vec<(String, Table)>,
}

impl Report {
    pub fn scalar(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.scalars.push((name.to_owned(), value.into()));
        self
    }

    pub fn sidecar(mut self, name: &str, table: Table) -> Self {
        self.sidecars.push((name.to_owned(), table));
        self
    }

    pub fn get_scalar(&self, name: &str) -> Option<&Value> {
        self.scalars.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    fn scalar_table(&self) -> Table {
        Table::default()
            .with("name", self.scalars.iter().map(|(n, _)| Value::Text(n.clone())))
            .with("value", self.scalars.iter().map(|(_, v)| v.clone()))
    }

    pub fn to_json(&self, config: &RunConfig) -> Result<Json, CliError> {
        let config = serde_json::to_value(config).map_err(|e| CliError::Output(e.to_string()))?;
        let mut scalars = Map::new();
        for (name, value) in &self.scalars {
            scalars.insert(name.clone(), value.json());
        }
        let mut root = Map::new();
        root.insert("config".into(), config);
        root.insert("scalars".into(), Json::Object(scalars));
        root.insert("columns".into(), self.columns.json());
        if !self.sidecars.iter().any(|(n, _)| n == "history") {
            root.insert("history".into(), Json::Object(Map::new()));
        }
        for (name, table) in &self.sidecars {
            root.insert(name.clone(), table.json());
        }
        Ok(Json::Object(root))
    }

    /// Writes the report and returns the files created. Without an output
    /// path, JSON or the main CSV table go to stdout and CSV scalars to
    /// stderr.
    pub fn write(&self, config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
        match (&config.output_path, config.output_format) {
            (None, Format::Json) => {
                let text = serde_json::to_string_pretty(&self.to_json(config)?)
                    .map_err(|e| CliError::Output(e.to_string()))?;
                writeln!(std::io::stdout().lock(), "{text}")?;
                Ok(Vec::new())
            }
            (None, Format::Csv) => {
                let main = if self.columns.is_empty() { self.scalar_table() } else { self.columns.clone() };
                main.write_csv(std::io::stdout().lock())?;
                if !self.columns.is_empty() {
                    for (name, value) in &self.scalars {
                        eprintln!("{name} = {}", value.csv());
                    }
                }
                Ok(Vec::new())
            }
            (Some(path), Format::Json) => {
                let text = serde_json::to_string_pretty(&self.to_json(config)?)
                    .map_err(|e| CliError::Output(e.to_string()))?;
                std::fs::write(path, text + "\n").map_err(|e| unwritable(path, e))?;
                Ok(vec![path.clone()])
            }
            (Some(path), Format::Csv) => {
                let mut written = Vec::new();
                let main = if self.columns.is_empty() { self.scalar_table() } else { self.columns.clone() };
                write_file(path, &main)?;
                written.push(path.clone());
                if !self.columns.is_empty() && !self.scalars.is_empty() {
                    let p = sidecar_path(path, "scalars");
                    write_file(&p, &self.scalar_table())?;
                    written.push(p);
                }
                for (name, table) in &self.sidecars {
                    let p = sidecar_path(path, name);
                    write_file(&p, table)?;
                    written.push(p);
                }
                Ok(written)
            }
        }
    }
}

fn unwritable(path: &Path, e: std::io::Error) -> CliError {
    CliError::Output(format!("cannot write {}: {e}", path.display()))
}

fn write_file(path: &Path, table: &Table) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| unwritable(path, e))?;
    table.write_csv(std::io::BufWriter::new(file))
}

/// `dir/run.csv` -> `dir/run.<name>.csv`.
pub fn sidecar_path(path: &Path, name: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "output".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{name}.csv"))
}
