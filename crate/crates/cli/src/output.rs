//! Tables and reports, rendered as CSV or JSON.

use anyhow::Result;
use intertwine::CharacterValue;
use serde_json::{json, Map, Value};

use crate::config::Format;

/// Rows of strings under a header, plus metadata for the JSON form.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub meta: Value,
}

impl Table {
    pub fn new(columns: &[&str], meta: Value) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            meta,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// What a subcommand produces.
#[derive(Clone, Debug)]
pub enum Artifact {
    Table(Table),
    /// a JSON document with a tabular CSV fallback
    Report { json: Value, table: Table },
}

impl Artifact {
    pub fn render(&self, format: Format) -> Result<String> {
        match (self, format) {
            (Artifact::Table(t), Format::Csv) | (Artifact::Report { table: t, .. }, Format::Csv) => {
                csv_string(t)
            }
            (Artifact::Table(t), Format::Json) => {
                let rows: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|r| {
                        let m: Map<String, Value> = t
                            .columns
                            .iter()
                            .cloned()
                            .zip(r.iter().map(|x| Value::String(x.clone())))
                            .collect();
                        Value::Object(m)
                    })
                    .collect();
                Ok(serde_json::to_string_pretty(&json!({"meta": t.meta, "rows": rows}))? + "\n")
            }
            (Artifact::Report { json, .. }, Format::Json) => Ok(serde_json::to_string_pretty(json)? + "\n"),
        }
    }
}

fn csv_string(t: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.columns)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// `num/den` pairs per cyclotomic coordinate.
pub fn coord_cells(v: &CharacterValue) -> Vec<String> {
    v.coords()
        .iter()
        .flat_map(|c| [c.numer().to_string(), c.denom().to_string()])
        .collect()
}

pub fn coord_columns(p: u64, stem: &str) -> Vec<String> {
    (0..p - 1)
        .flat_map(|j| [format!("{stem}_z{j}_num"), format!("{stem}_z{j}_den")])
        .collect()
}
