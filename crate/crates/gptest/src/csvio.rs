//! Numeric CSV reading and writing for [`Dataset`]s.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use gptest_core::dataset::{Column, ColumnKind, Dataset};
use gptest_core::SchemaError;

use crate::error::{AppError, AppResult};

/// A column to extract from a CSV file and its declared kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        ColumnSchema {
            name: name.into(),
            kind,
        }
    }
}

fn schema_err(path: &Path, source: SchemaError) -> AppError {
    AppError::Schema {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads the schema's columns from a headed, comma-separated file. Other
/// columns are ignored. Row numbers in errors count data rows from 1.
pub fn read_csv(path: &Path, schema: &[ColumnSchema]) -> AppResult<Dataset> {
    let file = File::open(path).map_err(|source| AppError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let csv_err = |source| AppError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(schema_err(path, SchemaError::EmptyInput));
    }
    let mut index = Vec::with_capacity(schema.len());
    for col in schema {
        let matches: Vec<usize> = headers
            .iter()
            .enumerate()
            .filter(|(_, h)| h.trim() == col.name)
            .map(|(i, _)| i)
            .collect();
        match matches.as_slice() {
            [] => return Err(schema_err(path, SchemaError::MissingColumn(col.name.clone()))),
            [i] => index.push(*i),
            _ => return Err(schema_err(path, SchemaError::DuplicateColumn(col.name.clone()))),
        }
    }
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); schema.len()];
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = r + 1;
        for ((col, &i), out) in schema.iter().zip(&index).zip(values.iter_mut()) {
            let cell = record.get(i).unwrap_or("").trim();
            let v: f64 = cell.parse().map_err(|_| {
                schema_err(
                    path,
                    SchemaError::NonNumeric {
                        row,
                        column: col.name.clone(),
                        value: cell.to_string(),
                    },
                )
            })?;
            if !v.is_finite() {
                return Err(schema_err(
                    path,
                    SchemaError::NonFinite {
                        row,
                        column: col.name.clone(),
                    },
                ));
            }
            out.push(v);
        }
    }
    if values.first().is_none_or(|v| v.is_empty()) {
        return Err(schema_err(path, SchemaError::EmptyInput));
    }
    let columns = schema
        .iter()
        .zip(values)
        .map(|(c, v)| Column::new(c.name.clone(), c.kind, v))
        .collect();
    Dataset::new(columns, format!("csv:{}", path.display())).map_err(|e| schema_err(path, e))
}

/// Writes every column; continuous values use 17 significant digits so the
/// file reads back to identical doubles, binary columns are written as 0/1.
pub fn write_csv(data: &Dataset, path: &Path) -> AppResult<()> {
    let io_err = |source| AppError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    let names: Vec<&str> = data.names().collect();
    writeln!(out, "{}", names.join(",")).map_err(io_err)?;
    let columns = data.columns();
    let mut line = String::new();
    for i in 0..data.n() {
        line.clear();
        for (k, col) in columns.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            let v = col.values[i];
            match col.kind {
                ColumnKind::Binary => line.push(if v == 1.0 { '1' } else { '0' }),
                ColumnKind::Continuous => line.push_str(&format!("{v:.16e}")),
            }
        }
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
