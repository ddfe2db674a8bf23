//! File formats: matrices as JSON (`{"rows", "cols", "data"}`, or a bare array
//! of rows) or CSV (one row per line, no header); systems as `{"F", "K"}`;
//! duals as `{"G"}` or a bare matrix; coded signals; plain JSON vectors.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::recovery::CodedSignal;

fn read_text(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(Error::InvalidMatrix(format!("{} is empty", path.display())));
    }
    Ok(text)
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn matrix_from_value(value: serde_json::Value) -> Result<DenseMatrix> {
    match value {
        serde_json::Value::Array(_) => DenseMatrix::from_rows(&serde_json::from_value::<Vec<Vec<f64>>>(value)?),
        serde_json::Value::Object(_) => Ok(serde_json::from_value(value)?),
        _ => Err(Error::InvalidMatrix(
            "expected an object {rows, cols, data} or an array of rows".into(),
        )),
    }
}

pub fn parse_matrix_json(text: &str) -> Result<DenseMatrix> {
    matrix_from_value(parse_json(text)?)
}

/// CSV without header; every record must have the same number of fields.
pub fn parse_matrix_csv(text: &str) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field.parse::<f64>().map_err(|_| {
                    Error::InvalidMatrix(format!(
                        "line {}, field {}: {field:?} is not a number",
                        rows.len() + 1,
                        j + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    DenseMatrix::from_rows(&rows)
}

/// A matrix file, CSV when the extension is `.csv` and JSON otherwise.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = read_text(path)?;
    if is_csv(path) {
        parse_matrix_csv(&text)
    } else {
        parse_matrix_json(&text)
    }
}

#[derive(Deserialize)]
struct SystemFile {
    #[serde(rename = "F")]
    f: serde_json::Value,
    #[serde(rename = "K")]
    k: serde_json::Value,
}

/// `(F, K)` from a `{"F": …, "K": …}` file. Not yet checked as a K-frame.
pub fn read_system(path: &Path) -> Result<(DenseMatrix, DenseMatrix)> {
    parse_system(&read_text(path)?)
}

pub fn parse_system(text: &str) -> Result<(DenseMatrix, DenseMatrix)> {
    let sys: SystemFile = parse_json(text)?;
    Ok((matrix_from_value(sys.f)?, matrix_from_value(sys.k)?))
}

/// G from `{"G": …}` or from a bare matrix (JSON or CSV).
pub fn read_dual(path: &Path) -> Result<DenseMatrix> {
    let text = read_text(path)?;
    if is_csv(path) {
        return parse_matrix_csv(&text);
    }
    let mut value: serde_json::Value = parse_json(&text)?;
    match value.get_mut("G") {
        Some(g) => matrix_from_value(g.take()),
        None => matrix_from_value(value),
    }
}

pub fn read_coded(path: &Path) -> Result<CodedSignal> {
    parse_json(&read_text(path)?)
}

/// A JSON array of numbers.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_json(&read_text(path)?)
}
