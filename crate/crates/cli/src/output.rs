use std::io::Write;

use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Debug)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

/// Seventeen significant digits.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> = self.header.iter().zip(r).map(|(h, c)| (h.to_string(), c.json())).collect();
                    Value::Object(m)
                })
                .collect(),
        )
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// What a command produces: a table for CSV and, optionally, a richer JSON
/// payload.
pub struct Report {
    pub table: Table,
    pub json: Option<Value>,
}

impl Report {
    pub fn table(table: Table) -> Self {
        Report { table, json: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn emit(report: &Report, meta: &impl Serialize, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => report.table.write_csv(out)?,
        Format::Json => {
            let data = report.json.clone().unwrap_or_else(|| report.table.to_json());
            let doc = json!({ "meta": meta, "data": data });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["j", "sz", "note"]);
        t.push(vec![1usize.into(), 0.5.into(), "a, b".into()]);
        t.push(vec![2usize.into(), (-1.0 / 3.0).into(), "c".into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "j,sz,note\n1,5.0000000000000000e-1,\"a, b\"\n2,-3.3333333333333331e-1,c\n");
    }

    #[test]
    fn json_rows() {
        let mut t = Table::new(&["n", "ok"]);
        t.push(vec![3usize.into(), true.into()]);
        assert_eq!(t.to_json(), json!([{"n": 3, "ok": true}]));
    }
}
