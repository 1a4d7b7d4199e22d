//! Reading distance matrices from JSON or CSV, with a canonical digest.
//!
//! JSON inputs are `{"labels": [...], "matrix": [[...]]}` (labels optional,
//! unknown fields ignored) or a bare array of rows. CSV inputs are a square
//! numeric grid with an optional header row of labels. `-` reads standard
//! input; otherwise the file extension decides the format, falling back to
//! sniffing the first character.
//!
//! The digest is a SHA-256 over a canonical 17-significant-digit rendering
//! of the matrix alone, so it changes exactly when the matrix does.

use std::io::Read;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::{CliError, ErrorKind};

pub struct LoadedInput {
    pub labels: Option<Vec<String>>,
    pub matrix: Vec<Vec<f64>>,
    pub digest: String,
}

#[derive(Deserialize)]
struct JsonDocument {
    #[serde(default)]
    labels: Option<Vec<String>>,
    matrix: Vec<Vec<f64>>,
}

pub fn matrix_digest(matrix: &[Vec<f64>]) -> String {
    let rows: Vec<String> = matrix
        .iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    let canonical = format!("[{}]", rows.join(","));
    let hash = Sha256::digest(canonical.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_input(path: &str) -> Result<LoadedInput, CliError> {
    let (content, is_json_hint) = if path == "-" {
        let mut buffer = String::new();
        std::io::stdin()
            .read_to_string(&mut buffer)
            .map_err(|e| CliError::io(format!("reading standard input: {e}")))?;
        (buffer, None)
    } else {
        let content = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading {path}: {e}")))?;
        let hint = if path.ends_with(".json") {
            Some(true)
        } else if path.ends_with(".csv") {
            Some(false)
        } else {
            None
        };
        (content, hint)
    };

    let is_json = is_json_hint.unwrap_or_else(|| {
        matches!(content.trim_start().chars().next(), Some('{') | Some('['))
    });
    let (labels, matrix) = if is_json {
        parse_json(&content)?
    } else {
        parse_csv(&content)?
    };
    let digest = matrix_digest(&matrix);
    Ok(LoadedInput {
        labels,
        matrix,
        digest,
    })
}

fn parse_json(content: &str) -> Result<(Option<Vec<String>>, Vec<Vec<f64>>), CliError> {
    let value: serde_json::Value = serde_json::from_str(content)
        .map_err(|e| CliError::parse(format!("invalid JSON: {e}")))?;
    match value {
        serde_json::Value::Array(_) => {
            let matrix: Vec<Vec<f64>> = serde_json::from_value(value)
                .map_err(|e| CliError::parse(format!("invalid matrix array: {e}")))?;
            Ok((None, matrix))
        }
        other => {
            let doc: JsonDocument = serde_json::from_value(other).map_err(|e| {
                CliError::parse(format!("expected {{\"labels\", \"matrix\"}}: {e}"))
            })?;
            Ok((doc.labels, doc.matrix))
        }
    }
}

fn parse_csv(content: &str) -> Result<(Option<Vec<String>>, Vec<Vec<f64>>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    let mut records: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::parse(format!("invalid CSV: {e}")))?;
        records.push(record.iter().map(str::to_owned).collect());
    }
    if records.is_empty() {
        return Err(CliError::parse("empty CSV input".into()));
    }
    let first_is_numeric = records[0].iter().all(|s| s.parse::<f64>().is_ok());
    let labels = if first_is_numeric {
        None
    } else {
        Some(records.remove(0))
    };
    let matrix = records
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, cell)| {
                    cell.parse::<f64>().map_err(|_| {
                        CliError::parse(format!("row {i}, column {j}: not a number: {cell:?}"))
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>, CliError>>()?;
    Ok((labels, matrix))
}

/// Weighted tree specification file: vertex count, edge list and an
/// optional subset of vertices to restrict the path metric to.
#[derive(Deserialize)]
pub struct TreeSpec {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub subset: Option<Vec<usize>>,
}

pub fn read_tree_spec(path: &str) -> Result<TreeSpec, CliError> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {path}: {e}")))?;
    serde_json::from_str(&content)
        .map_err(|e| CliError::parse(format!("invalid tree specification: {e}")))
}

/// Default tolerance override from the `FINMETRIC_TOL` environment
/// variable; absent means the library's relative default.
pub fn env_tolerance() -> Result<Option<f64>, CliError> {
    match std::env::var("FINMETRIC_TOL") {
        Ok(raw) => {
            let value: f64 = raw.parse().map_err(|_| CliError {
                kind: ErrorKind::Usage,
                name: "Usage",
                message: format!("FINMETRIC_TOL must be a number, got {raw:?}"),
            })?;
            if !(value >= 0.0 && value.is_finite()) {
                return Err(CliError {
                    kind: ErrorKind::Usage,
                    name: "Usage",
                    message: format!("FINMETRIC_TOL must be finite and nonnegative, got {value}"),
                });
            }
            Ok(Some(value))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::parse(format!("FINMETRIC_TOL: {e}"))),
    }
}
