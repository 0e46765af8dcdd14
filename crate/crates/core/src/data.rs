//! Column-oriented feature tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Categorical,
}

/// Values of one feature across all instances.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Continuous(Vec<f64>),
    /// `codes[i]` indexes into `levels`.
    Categorical { levels: Vec<String>, codes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn continuous(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column { name: name.into(), data: ColumnData::Continuous(values) }
    }

    /// Builds a categorical column; levels are sorted so codes do not depend
    /// on row order.
    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, values: &[S]) -> Self {
        let mut levels: Vec<String> = values.iter().map(|v| v.as_ref().to_string()).collect();
        levels.sort();
        levels.dedup();
        let codes = values
            .iter()
            .map(|v| levels.binary_search_by(|l| l.as_str().cmp(v.as_ref())).unwrap())
            .collect();
        Column { name: name.into(), data: ColumnData::Categorical { levels, codes } }
    }

    pub fn kind(&self) -> FeatureKind {
        match self.data {
            ColumnData::Continuous(_) => FeatureKind::Continuous,
            ColumnData::Categorical { .. } => FeatureKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Continuous(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_continuous(&self) -> Option<&[f64]> {
        match &self.data {
            ColumnData::Continuous(v) => Some(v),
            _ => None,
        }
    }

    fn select_rows(&self, rows: &[usize]) -> Column {
        let data = match &self.data {
            ColumnData::Continuous(v) => ColumnData::Continuous(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical { levels, codes } => ColumnData::Categorical {
                levels: levels.clone(),
                codes: rows.iter().map(|&r| codes[r]).collect(),
            },
        };
        Column { name: self.name.clone(), data }
    }
}

/// An n×p table of instances by features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    columns: Vec<Column>,
    row_labels: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let n_rows = columns.first().map(Column::len).unwrap_or(0);
        let row_labels = (1..=n_rows).map(|i| i.to_string()).collect();
        Self::with_row_labels(columns, row_labels)
    }

    pub fn with_row_labels(columns: Vec<Column>, row_labels: Vec<String>) -> Result<Self> {
        let n_rows = row_labels.len();
        for c in &columns {
            if c.len() != n_rows {
                return Err(Error::InvalidInput(format!(
                    "column '{}' has {} values, expected {}",
                    c.name,
                    c.len(),
                    n_rows
                )));
            }
            if let ColumnData::Continuous(v) = &c.data {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput(format!("column '{}' has non-finite values", c.name)));
                }
            }
        }
        Ok(FeatureMatrix { n_rows, columns, row_labels })
    }

    /// Convenience constructor from row-major continuous data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        let columns = (0..p)
            .map(|j| Column::continuous(format!("X{}", j + 1), rows.iter().map(|r| r[j]).collect()))
            .collect();
        Self::with_row_labels(columns, (1..=rows.len()).map(|i| i.to_string()).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    /// Indices of continuous columns.
    pub fn continuous_indices(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&j| self.columns[j].kind() == FeatureKind::Continuous)
            .collect()
    }

    /// Row-major view of the listed continuous columns.
    pub fn continuous_rows(&self, cols: &[usize]) -> Vec<Vec<f64>> {
        let views: Vec<&[f64]> = cols
            .iter()
            .map(|&j| self.columns[j].as_continuous().expect("continuous column"))
            .collect();
        (0..self.n_rows).map(|i| views.iter().map(|v| v[i]).collect()).collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            n_rows: self.n_rows,
            columns: cols.iter().map(|&j| self.columns[j].clone()).collect(),
            row_labels: self.row_labels.clone(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            n_rows: rows.len(),
            columns: self.columns.iter().map(|c| c.select_rows(rows)).collect(),
            row_labels: rows.iter().map(|&r| self.row_labels[r].clone()).collect(),
        }
    }
}
