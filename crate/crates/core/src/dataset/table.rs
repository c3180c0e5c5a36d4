use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Named-column numeric table with a designated response column and an
/// optional integer class-label column. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    column_names: Vec<String>,
    n_rows: usize,
    data: Vec<f64>,
    response_col: usize,
    class_col: Option<usize>,
}

impl Table {
    pub fn new(
        column_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        response_col: usize,
        class_col: Option<usize>,
    ) -> Result<Self> {
        let n_cols = column_names.len();
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_cols {
                return Err(Error::InvalidTable(format!(
                    "row {} has {} entries, expected {n_cols}",
                    i + 1,
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(column_names, rows.len(), data, response_col, class_col)
    }

    pub fn from_row_major(
        column_names: Vec<String>,
        n_rows: usize,
        data: Vec<f64>,
        response_col: usize,
        class_col: Option<usize>,
    ) -> Result<Self> {
        let n_cols = column_names.len();
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                got: data.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        if response_col >= n_cols {
            return Err(Error::InvalidTable(format!(
                "response column index {response_col} out of range"
            )));
        }
        if let Some(c) = class_col {
            if c >= n_cols {
                return Err(Error::InvalidTable(format!("class column index {c} out of range")));
            }
            if c == response_col {
                return Err(Error::InvalidTable(
                    "response and class column must differ".into(),
                ));
            }
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTable(format!(
                "non-finite value at row {}, column '{}'",
                pos / n_cols + 1,
                column_names[pos % n_cols]
            )));
        }
        if let Some(c) = class_col {
            for i in 0..n_rows {
                let v = data[i * n_cols + c];
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(Error::InvalidTable(format!(
                        "class label {v} at row {} is not an integer >= 1",
                        i + 1
                    )));
                }
            }
        }
        Ok(Table {
            column_names,
            n_rows,
            data,
            response_col,
            class_col,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn response_col(&self) -> usize {
        self.response_col
    }

    pub fn class_col(&self) -> Option<usize> {
        self.class_col
    }

    pub fn response_name(&self) -> &str {
        &self.column_names[self.response_col]
    }

    pub fn class_name(&self) -> Option<&str> {
        self.class_col.map(|c| self.column_names[c].as_str())
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_cols();
        &self.data[i * n..(i + 1) * n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols() + j]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub(crate) fn require_column(&self, name: &str) -> Result<usize> {
        self.column_index(name).ok_or_else(|| Error::UnknownColumn {
            name: name.to_string(),
            available: self.column_names.join(", "),
        })
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.column(self.require_column(name)?))
    }

    pub fn response(&self) -> Vec<f64> {
        self.column(self.response_col)
    }

    pub fn class_labels(&self) -> Option<Vec<u32>> {
        self.class_col
            .map(|c| (0..self.n_rows).map(|i| self.get(i, c) as u32).collect())
    }

    /// Distinct class labels in ascending order.
    pub fn class_levels(&self) -> Vec<u32> {
        self.class_labels()
            .map(|l| l.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .unwrap_or_default()
    }

    /// Column indices that are neither response nor class.
    pub fn predictor_indices(&self) -> Vec<usize> {
        (0..self.n_cols())
            .filter(|&j| j != self.response_col && Some(j) != self.class_col)
            .collect()
    }

    pub fn predictor_names(&self) -> Vec<String> {
        self.predictor_indices()
            .into_iter()
            .map(|j| self.column_names[j].clone())
            .collect()
    }

    /// Predictor columns (response and class excluded) as a dense matrix.
    pub fn predictor_matrix(&self) -> Matrix {
        let idx = self.predictor_indices();
        let mut data = Vec::with_capacity(self.n_rows * idx.len());
        for i in 0..self.n_rows {
            let r = self.row(i);
            data.extend(idx.iter().map(|&j| r[j]));
        }
        Matrix::from_row_major(self.n_rows, idx.len(), data).expect("shape is consistent")
    }

    pub fn select_rows(&self, rows: &[usize]) -> Table {
        let n = self.n_cols();
        let mut data = Vec::with_capacity(rows.len() * n);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Table {
            column_names: self.column_names.clone(),
            n_rows: rows.len(),
            data,
            response_col: self.response_col,
            class_col: self.class_col,
        }
    }

    /// Keeps the named columns in the given order. The response must be
    /// among them; the class column is kept only if listed.
    pub fn select_columns(&self, names: &[&str]) -> Result<Table> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.require_column(n))
            .collect::<Result<_>>()?;
        let response_col = idx
            .iter()
            .position(|&j| j == self.response_col)
            .ok_or_else(|| Error::InvalidTable("response column not selected".into()))?;
        let class_col = self
            .class_col
            .and_then(|c| idx.iter().position(|&j| j == c));
        let mut data = Vec::with_capacity(self.n_rows * idx.len());
        for i in 0..self.n_rows {
            let r = self.row(i);
            data.extend(idx.iter().map(|&j| r[j]));
        }
        Table::from_row_major(
            idx.iter().map(|&j| self.column_names[j].clone()).collect(),
            self.n_rows,
            data,
            response_col,
            class_col,
        )
    }

    /// Removes the class column if present.
    pub fn without_class(&self) -> Table {
        match self.class_col {
            None => self.clone(),
            Some(c) => {
                let names: Vec<&str> = self
                    .column_names
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != c)
                    .map(|(_, n)| n.as_str())
                    .collect();
                self.select_columns(&names).expect("columns exist")
            }
        }
    }

    /// Returns a copy with the response column values replaced.
    pub fn with_response(&self, y: &[f64]) -> Result<Table> {
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                got: y.len(),
            });
        }
        let mut t = self.clone();
        let n = t.n_cols();
        for (i, v) in y.iter().enumerate() {
            t.data[i * n + t.response_col] = *v;
        }
        Table::from_row_major(t.column_names, t.n_rows, t.data, t.response_col, t.class_col)
    }
}
