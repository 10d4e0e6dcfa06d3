use std::path::Path;

use crate::error::{Error, Result};
use crate::models::BinaryRegressionData;

/// Reads a binary-regression dataset.
///
/// The file needs a header row and a response column named `y` holding 0/1.
/// Regressors are the other columns in file order, or exactly the named
/// `columns` in the given order when a selection is passed. With
/// `add_intercept` a column of ones is prepended.
pub fn load_design_matrix(
    path: impl AsRef<Path>,
    add_intercept: bool,
    columns: Option<&[String]>,
) -> Result<BinaryRegressionData> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let y_col = headers
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| Error::load(path, "no response column named `y` in header"))?;
    let x_cols: Vec<usize> = match columns {
        Some(names) => names
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h == name)
                    .filter(|&c| c != y_col)
                    .ok_or_else(|| Error::load(path, format!("no regressor column named `{name}`")))
            })
            .collect::<Result<_>>()?,
        None => (0..headers.len()).filter(|&c| c != y_col).collect(),
    };
    if x_cols.is_empty() {
        return Err(Error::load(path, "no regressor columns"));
    }

    let mut rows = Vec::new();
    let mut response = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        // data row r sits on file line r + 2
        let line = r + 2;
        let cell = |c: usize| -> Result<f64> {
            let raw = record.get(c).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::load(
                        path,
                        format!("line {line}, column `{}`: non-numeric value {raw:?}", headers[c]),
                    )
                })
        };
        let y = cell(y_col)?;
        if y != 0.0 && y != 1.0 {
            return Err(Error::load(
                path,
                format!("line {line}, column `y`: response must be 0 or 1, got {y}"),
            ));
        }
        let mut row: Vec<f64> = x_cols.iter().map(|&c| cell(c)).collect::<Result<_>>()?;
        if row.iter().all(|v| *v == 0.0) {
            return Err(Error::load(path, format!("line {line}: all-zero regressor row")));
        }
        if add_intercept {
            row.insert(0, 1.0);
        }
        rows.push(row);
        response.push(y as u8);
    }
    BinaryRegressionData::new(rows, response).map_err(|e| Error::load(path, e.to_string()))
}

/// Writes a dataset in the format read by [`load_design_matrix`].
pub fn write_design_matrix(
    path: impl AsRef<Path>,
    names: &[&str],
    rows: &[Vec<f64>],
    response: &[u8],
) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header: Vec<&str> = names.to_vec();
    header.push("y");
    writer.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (row, y) in rows.iter().zip(response) {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        record.push(y.to_string());
        writer.write_record(&record).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::load(path, e.to_string())
    }
}
