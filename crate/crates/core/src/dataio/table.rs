//! Rectangular CSV documents with typed columns.
//!
//! Dialect: comma separator, LF line endings, UTF-8, quotes only when a
//! field needs them. Decimal columns are written with a fixed number of
//! fractional digits so output is byte-stable.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use rust_decimal::{Decimal, RoundingStrategy};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("io failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row} has {got} cells, expected {expected}")]
    NotRectangular {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    HeaderMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("row {row}, column {column}: cannot parse {value:?}")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Text,
    Integer,
    Date,
    /// Fixed number of fractional digits.
    Decimal(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: &str, kind: ColumnKind) -> Column {
        Column {
            name: name.to_string(),
            kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cell {
    Text(String),
    Integer(i64),
    Date(NaiveDate),
    Decimal(Decimal),
}

impl Cell {
    /// Decimal cell from a float; non-finite values become zero.
    pub fn float(x: f64) -> Cell {
        use rust_decimal::prelude::FromPrimitive;
        Cell::Decimal(Decimal::from_f64(x).unwrap_or_default())
    }

    fn render(&self, kind: ColumnKind) -> String {
        match (self, kind) {
            (Cell::Decimal(d), ColumnKind::Decimal(p)) => {
                let r = d.round_dp_with_strategy(p, RoundingStrategy::MidpointAwayFromZero);
                format!("{:.*}", p as usize, r)
            }
            (Cell::Decimal(d), _) => d.normalize().to_string(),
            (Cell::Text(s), _) => s.clone(),
            (Cell::Integer(i), _) => i.to_string(),
            (Cell::Date(d), _) => d.format("%Y-%m-%d").to_string(),
        }
    }

    fn parse(text: &str, kind: ColumnKind) -> Option<Cell> {
        Some(match kind {
            ColumnKind::Text => Cell::Text(text.to_string()),
            ColumnKind::Integer => Cell::Integer(text.parse().ok()?),
            ColumnKind::Date => Cell::Date(NaiveDate::parse_from_str(text, "%Y-%m-%d").ok()?),
            ColumnKind::Decimal(_) => Cell::Decimal(Decimal::from_str(text).ok()?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableDocument {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl TableDocument {
    pub fn new(name: &str, columns: Vec<Column>) -> TableDocument {
        TableDocument {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn headers(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn check_rectangular(&self) -> Result<(), TableError> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(TableError::NotRectangular {
                    row: i + 1,
                    got: row.len(),
                    expected: self.columns.len(),
                });
            }
        }
        Ok(())
    }
}

fn writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(buf)
}

/// Renders `doc` in the pinned dialect.
pub fn table_to_csv(doc: &TableDocument) -> Result<String, TableError> {
    doc.check_rectangular()?;
    let mut buf = Vec::new();
    {
        let mut w = writer(&mut buf);
        w.write_record(doc.columns.iter().map(|c| c.name.as_str()))?;
        for row in &doc.rows {
            w.write_record(
                row.iter()
                    .zip(&doc.columns)
                    .map(|(cell, col)| cell.render(col.kind)),
            )?;
        }
        w.flush().map_err(|e| TableError::IoFailure {
            path: "<memory>".into(),
            source: e,
        })?;
    }
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn write_table(doc: &TableDocument, path: &Path) -> Result<(), TableError> {
    let text = table_to_csv(doc)?;
    fs::write(path, text).map_err(|source| TableError::IoFailure {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a CSV written by [`write_table`] against an expected schema.
pub fn read_table(
    path: &Path,
    name: &str,
    columns: &[Column],
) -> Result<TableDocument, TableError> {
    let text = fs::read_to_string(path).map_err(|source| TableError::IoFailure {
        path: path.display().to_string(),
        source,
    })?;
    parse_table(&text, name, columns)
}

pub fn parse_table(
    text: &str,
    name: &str,
    columns: &[Column],
) -> Result<TableDocument, TableError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let expected: Vec<String> = columns.iter().map(|c| c.name.clone()).collect();
    if found != expected {
        return Err(TableError::HeaderMismatch { expected, found });
    }
    let mut doc = TableDocument::new(name, columns.to_vec());
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut row = Vec::with_capacity(columns.len());
        for (value, col) in rec.iter().zip(columns) {
            row.push(
                Cell::parse(value, col.kind).ok_or_else(|| TableError::BadCell {
                    row: i + 1,
                    column: col.name.clone(),
                    value: value.to_string(),
                })?,
            );
        }
        doc.rows.push(row);
    }
    Ok(doc)
}
