//! Column-named observation tables.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::numerics::Matrix;
use crate::{Result, SchemaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Values restricted to `{0, 1}`; modelled with logistic regression.
    Binary,
    /// Any finite real; modelled with least squares.
    Continuous,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Binary => "binary",
            ColumnKind::Continuous => "continuous",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            kind,
            values,
        }
    }
}

/// Observations stored column-wise. Construction checks that all columns have
/// the same length, values are finite, and binary columns hold only 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    n: usize,
    provenance: String,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, provenance: impl Into<String>) -> Result<Self, SchemaError> {
        let first = columns.first().ok_or(SchemaError::EmptyInput)?;
        let n = first.values.len();
        if n == 0 {
            return Err(SchemaError::EmptyInput);
        }
        for (c, col) in columns.iter().enumerate() {
            if columns[..c].iter().any(|o| o.name == col.name) {
                return Err(SchemaError::DuplicateColumn(col.name.clone()));
            }
            if col.values.len() != n {
                return Err(SchemaError::LengthMismatch {
                    column: col.name.clone(),
                    expected: n,
                    found: col.values.len(),
                });
            }
            for (row, &v) in col.values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(SchemaError::NonFinite {
                        row,
                        column: col.name.clone(),
                    });
                }
                if col.kind == ColumnKind::Binary && v != 0.0 && v != 1.0 {
                    return Err(SchemaError::BinaryViolation {
                        row,
                        column: col.name.clone(),
                        value: v,
                    });
                }
            }
        }
        Ok(Dataset {
            columns,
            n,
            provenance: provenance.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    fn find(&self, name: &str) -> Result<&Column, SchemaError> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| SchemaError::MissingColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&[f64], SchemaError> {
        Ok(&self.find(name)?.values)
    }

    pub fn kind(&self, name: &str) -> Result<ColumnKind, SchemaError> {
        Ok(self.find(name)?.kind)
    }

    /// Column that must be declared binary.
    pub fn binary_column(&self, name: &str) -> Result<&[f64], SchemaError> {
        let c = self.find(name)?;
        if c.kind != ColumnKind::Binary {
            return Err(SchemaError::WrongKind {
                column: name.to_string(),
                expected: "binary",
            });
        }
        Ok(&c.values)
    }

    /// `n × names.len()` matrix of the named columns.
    pub fn matrix<S: AsRef<str>>(&self, names: &[S]) -> Result<Matrix, SchemaError> {
        let cols = names
            .iter()
            .map(|s| self.column(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut m = Matrix::zeros(self.n, cols.len());
        for i in 0..self.n {
            for (j, c) in cols.iter().enumerate() {
                m[(i, j)] = c[i];
            }
        }
        Ok(m)
    }

    /// Copy of `self` with column `name` replaced by `values`.
    pub fn with_column_values(&self, name: &str, values: Vec<f64>) -> Result<Dataset, SchemaError> {
        let mut columns = self.columns.clone();
        let col = columns
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| SchemaError::MissingColumn(name.to_string()))?;
        col.values = values;
        Dataset::new(columns, self.provenance.clone())
    }

    /// Per-column `(min, max)` widened by `pad` times the spread on each side.
    pub fn empirical_ranges<S: AsRef<str>>(&self, names: &[S], pad: f64) -> Result<Vec<(f64, f64)>, SchemaError> {
        names
            .iter()
            .map(|s| {
                let v = self.column(s.as_ref())?;
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let spread = if hi > lo { hi - lo } else { 1.0 };
                Ok((lo - pad * spread, hi + pad * spread))
            })
            .collect()
    }
}
