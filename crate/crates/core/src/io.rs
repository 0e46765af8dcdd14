//! CSV ingestion and export.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Column, ColumnData, FeatureMatrix};
use crate::error::{Error, Result};

/// How a CSV column is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Continuous,
    Categorical,
    /// Reference classes; kept apart from the features.
    Label,
    Ignore,
}

impl FromStr for ColumnRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "continuous" => Ok(ColumnRole::Continuous),
            "categorical" => Ok(ColumnRole::Categorical),
            "label" => Ok(ColumnRole::Label),
            "ignore" => Ok(ColumnRole::Ignore),
            _ => Err(Error::InvalidInput(format!("unknown column role '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub name: String,
    /// Sorted distinct values.
    pub levels: Vec<String>,
    pub codes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: FeatureMatrix,
    pub labels: Option<Labels>,
}

const MISSING: [&str; 5] = ["", "NA", "NaN", "nan", "?"];

/// Reads a comma-separated file with a header row. Columns whose values all
/// parse as numbers are continuous, the rest categorical; `overrides`
/// (keyed by header name) take precedence.
pub fn read_csv(path: impl AsRef<Path>, overrides: &BTreeMap<String, ColumnRole>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path)?;
    parse_csv(file, &path.display().to_string(), overrides)
}

/// Like [`read_csv`]; `source` names the input in error messages.
pub fn parse_csv<R: Read>(reader: R, source: &str, overrides: &BTreeMap<String, ColumnRole>) -> Result<Dataset> {
    let parse_err = |row: usize, msg: String| Error::Parse { path: source.to_string(), row, msg };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().any(String::is_empty) {
        return Err(parse_err(1, "header has an empty column name".into()));
    }
    for (i, h) in header.iter().enumerate() {
        if header[..i].contains(h) {
            return Err(parse_err(1, format!("duplicate column '{h}'")));
        }
    }
    for name in overrides.keys() {
        if !header.contains(name) {
            return Err(Error::InvalidInput(format!("{source}: no column named '{name}'")));
        }
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (r, record) in rdr.records().enumerate() {
        let row = r + 2;
        let record = record?;
        if record.len() != header.len() {
            return Err(parse_err(row, format!("expected {} fields, found {}", header.len(), record.len())));
        }
        for (j, field) in record.iter().enumerate() {
            if MISSING.contains(&field) {
                return Err(parse_err(row, format!("missing value in column '{}'", header[j])));
            }
            cells[j].push(field.to_string());
        }
    }
    if cells[0].is_empty() {
        return Err(parse_err(2, "no data rows".into()));
    }

    let mut columns = Vec::new();
    let mut labels = None;
    for (name, values) in header.iter().zip(cells) {
        let numeric: Option<Vec<f64>> = values.iter().map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite())).collect();
        let role = overrides.get(name).copied().unwrap_or(if numeric.is_some() {
            ColumnRole::Continuous
        } else {
            ColumnRole::Categorical
        });
        match role {
            ColumnRole::Ignore => {}
            ColumnRole::Continuous => {
                let v = numeric.ok_or_else(|| {
                    let bad = values.iter().position(|v| v.parse::<f64>().map_or(true, |x| !x.is_finite())).unwrap();
                    parse_err(bad + 2, format!("column '{name}': '{}' is not a number", values[bad]))
                })?;
                columns.push(Column::continuous(name.clone(), v));
            }
            ColumnRole::Categorical => columns.push(Column::categorical(name.clone(), &values)),
            ColumnRole::Label => {
                if labels.is_some() {
                    return Err(Error::InvalidInput("more than one label column".into()));
                }
                let ColumnData::Categorical { levels, codes } = Column::categorical(name.clone(), &values).data else {
                    unreachable!()
                };
                labels = Some(Labels { name: name.clone(), levels, codes });
            }
        }
    }
    if columns.is_empty() {
        return Err(Error::InvalidInput(format!("{source}: no feature columns")));
    }
    Ok(Dataset { features: FeatureMatrix::new(columns)?, labels })
}

/// Writes features (and labels as a last column) with a header row.
/// Reals use the shortest representation that reads back exactly.
pub fn write_csv<W: Write>(x: &FeatureMatrix, labels: Option<(&str, &[String])>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = x.column_names();
    if let Some((name, _)) = labels {
        header.push(name);
    }
    w.write_record(&header)?;
    for i in 0..x.n_rows() {
        let mut row: Vec<String> = x
            .columns()
            .iter()
            .map(|c| match &c.data {
                ColumnData::Continuous(v) => format!("{}", v[i]),
                ColumnData::Categorical { levels, codes } => levels[codes[i]].clone(),
            })
            .collect();
        if let Some((_, l)) = labels {
            row.push(l[i].clone());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
