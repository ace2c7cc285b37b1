//! Column-oriented CSV series: a header row of series names, then one row
//! per hour (or week).

use std::collections::BTreeMap;
use std::path::Path;

use crate::config::ConfigError;

/// Reads every column of `path` keyed by its header.
pub fn read_columns(path: &Path) -> Result<BTreeMap<String, Vec<f64>>, ConfigError> {
    let csv_err = |source| ConfigError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        // Header is line 1.
        let line = row + 2;
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| ConfigError::BadValue {
                path: path.to_path_buf(),
                line,
                message: format!("`{field}` in column `{}` is not a number", headers[c]),
            })?;
            cols[c].push(v);
        }
    }
    let mut out = BTreeMap::new();
    for (h, c) in headers.into_iter().zip(cols) {
        if out.insert(h.clone(), c).is_some() {
            return Err(ConfigError::BadValue {
                path: path.to_path_buf(),
                line: 1,
                message: format!("duplicate column `{h}`"),
            });
        }
    }
    Ok(out)
}

/// Writes equally long columns under `headers`, atomically.
pub fn write_columns(path: &Path, headers: &[String], cols: &[&[f64]]) -> Result<(), ConfigError> {
    let rows = cols.first().map_or(0, |c| c.len());
    if cols.iter().any(|c| c.len() != rows) || cols.len() != headers.len() {
        return Err(ConfigError::Invalid(format!(
            "{}: columns of unequal length",
            path.display()
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |source| ConfigError::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(headers).map_err(csv_err)?;
    for r in 0..rows {
        w.write_record(cols.iter().map(|c| c[r].to_string()))
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    crate::io::write_atomic(path, &bytes).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}
