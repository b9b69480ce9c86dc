//! Result tables and their CSV/JSON encodings.
//!
//! Every table starts with a `schema_version` column. CSV cells use the
//! shortest round-trip decimal form of floats and the sentinels `inf`,
//! `-inf`, `nan`; empty cells mean "not applicable". JSON output is an
//! array with one object per CSV row, keys in column order, non-finite
//! floats as the same sentinel strings and empty cells as `null`.

use std::io::Write;

use optpred::format_f64;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::config::Format;
use crate::error::{CliError, CliResult};

/// Version of the row layouts below.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    /// Rendered `a;b;c` in CSV and as an array in JSON.
    Floats(Vec<f64>),
}

impl Cell {
    pub fn opt_float(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_f64(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Floats(v) => v.iter().map(|x| format_f64(*x)).collect::<Vec<_>>().join(";"),
        }
    }
}

struct JsonFloat(f64);

impl Serialize for JsonFloat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&format_f64(self.0))
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Empty => s.serialize_none(),
            Cell::Int(v) => s.serialize_u64(*v),
            Cell::Float(v) => JsonFloat(*v).serialize(s),
            Cell::Bool(v) => s.serialize_bool(*v),
            Cell::Text(v) => s.serialize_str(v),
            Cell::Floats(v) => {
                let mut seq = s.serialize_seq(Some(v.len()))?;
                for x in v {
                    seq.serialize_element(&JsonFloat(*x))?;
                }
                seq.end()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<Cell>>,
}

struct JsonRow<'a> {
    columns: &'a [&'a str],
    cells: &'a [Cell],
}

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (k, v) in self.columns.iter().zip(self.cells) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Table {
    /// `columns` excludes the leading `schema_version` column, which is
    /// added to every row.
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width");
        self.rows.push(cells);
    }

    pub fn columns(&self) -> &'static [&'static str] {
        self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> CliResult<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv<W: Write>(&self, out: W) -> CliResult<()> {
        let err = |e: csv::Error| CliError::Write(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["schema_version"];
        header.extend_from_slice(self.columns);
        w.write_record(&header).map_err(err)?;
        let version = OUTPUT_SCHEMA_VERSION.to_string();
        for row in &self.rows {
            let mut rec = vec![version.clone()];
            rec.extend(row.iter().map(Cell::csv));
            w.write_record(&rec).map_err(err)?;
        }
        w.flush().map_err(|e| CliError::Write(e.to_string()))
    }

    fn write_json<W: Write>(&self, mut out: W) -> CliResult<()> {
        let mut columns = vec!["schema_version"];
        columns.extend_from_slice(self.columns);
        let rows: Vec<Vec<Cell>> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![Cell::Int(OUTPUT_SCHEMA_VERSION as u64)];
                v.extend(r.iter().cloned());
                v
            })
            .collect();
        let json: Vec<JsonRow> = rows
            .iter()
            .map(|cells| JsonRow {
                columns: &columns,
                cells,
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &json).map_err(|e| CliError::Write(e.to_string()))?;
        out.write_all(b"\n").map_err(|e| CliError::Write(e.to_string()))
    }
}
