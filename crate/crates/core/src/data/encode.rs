//! CSV ingestion against a schema, plus reading and writing the crate's own
//! encoded CSV format (header of feature names, optional trailing `label`
//! column of 0/1).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::data::schema::{ColumnKind, SchemaSpec};
use crate::error::{Error, Result};
use crate::tensor::Tensor2D;

/// A dataset after encoding: numeric feature matrix, optional binary labels
/// (true = anomalous), the encoded feature names, and, once normalization
/// statistics have been applied, the per-feature (min, max) they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub features: Tensor2D,
    pub labels: Option<Vec<bool>>,
    pub feature_names: Vec<String>,
    pub norm_stats: Option<Vec<(f64, f64)>>,
}

impl EncodedDataset {
    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn labels_or_err(&self) -> Result<&[bool]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("dataset has no labels".into()))
    }
}

/// Load a raw CSV and encode it against the schema: numeric columns pass
/// through, categorical columns expand to one-hot blocks in vocabulary
/// order, the label column maps to the positive-value set.
pub fn load_csv(path: &Path, schema: &SchemaSpec, has_header: bool) -> Result<EncodedDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let width = schema.encoded_width();
    let mut data: Vec<f64> = Vec::new();
    let mut labels: Vec<bool> = Vec::new();
    let mut n_rows = 0;

    for (row_idx, record) in reader.records().enumerate() {
        let row_no = row_idx + 1;
        let record = record.map_err(|e| Error::CsvData {
            path: path.to_owned(),
            row: row_no,
            column: "-".into(),
            message: e.to_string(),
        })?;
        if record.len() != schema.columns.len() {
            return Err(Error::CsvData {
                path: path.to_owned(),
                row: row_no,
                column: "-".into(),
                message: format!(
                    "expected {} fields, found {}",
                    schema.columns.len(),
                    record.len()
                ),
            });
        }
        for (field, col) in record.iter().zip(&schema.columns) {
            match &col.kind {
                ColumnKind::Numeric => {
                    let v: f64 = field.parse().map_err(|_| Error::CsvData {
                        path: path.to_owned(),
                        row: row_no,
                        column: col.name.clone(),
                        message: format!("not a number: {field:?}"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::CsvData {
                            path: path.to_owned(),
                            row: row_no,
                            column: col.name.clone(),
                            message: format!("non-finite value: {field:?}"),
                        });
                    }
                    data.push(v);
                }
                ColumnKind::Categorical(vocab) => {
                    let pos =
                        vocab
                            .iter()
                            .position(|v| v == field)
                            .ok_or_else(|| Error::CsvData {
                                path: path.to_owned(),
                                row: row_no,
                                column: col.name.clone(),
                                message: format!("value {field:?} not in vocabulary"),
                            })?;
                    let start = data.len();
                    data.resize(start + vocab.len(), 0.0);
                    data[start + pos] = 1.0;
                }
                ColumnKind::Label(positives) => {
                    labels.push(positives.iter().any(|p| p == field));
                }
            }
        }
        n_rows += 1;
    }

    Ok(EncodedDataset {
        features: Tensor2D::from_vec(n_rows, width, data)?,
        labels: Some(labels),
        feature_names: schema.feature_names(),
        norm_stats: None,
    })
}

/// Write a dataset in the crate's encoded CSV format.
pub fn write_encoded_csv(ds: &EncodedDataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut header = ds.feature_names.join(",");
    if ds.labels.is_some() {
        header.push_str(",label");
    }
    writeln!(w, "{header}").map_err(|e| Error::io(path, e))?;
    for r in 0..ds.n_samples() {
        let mut line = ds
            .features
            .row(r)
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        if let Some(labels) = &ds.labels {
            line.push_str(if labels[r] { ",1" } else { ",0" });
        }
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a dataset written by [`write_encoded_csv`]: a header of feature
/// names with an optional trailing `label` column holding 0/1.
pub fn load_encoded_csv(path: &Path) -> Result<EncodedDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::CsvData {
            path: path.to_owned(),
            row: 0,
            column: "-".into(),
            message: e.to_string(),
        })?
        .clone();
    let has_label = headers.iter().next_back() == Some("label");
    let n_features = headers.len() - usize::from(has_label);
    if n_features == 0 {
        return Err(Error::CsvData {
            path: path.to_owned(),
            row: 0,
            column: "-".into(),
            message: "no feature columns".into(),
        });
    }
    let feature_names: Vec<String> = headers.iter().take(n_features).map(str::to_owned).collect();

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut n_rows = 0;
    for (row_idx, record) in reader.records().enumerate() {
        let row_no = row_idx + 1;
        let record = record.map_err(|e| Error::CsvData {
            path: path.to_owned(),
            row: row_no,
            column: "-".into(),
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::CsvData {
                path: path.to_owned(),
                row: row_no,
                column: "-".into(),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (i, field) in record.iter().take(n_features).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::CsvData {
                path: path.to_owned(),
                row: row_no,
                column: feature_names[i].clone(),
                message: format!("not a number: {field:?}"),
            })?;
            data.push(v);
        }
        if has_label {
            let field = record.get(n_features).unwrap();
            labels.push(match field {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::CsvData {
                        path: path.to_owned(),
                        row: row_no,
                        column: "label".into(),
                        message: format!("labels must be 0 or 1, got {other:?}"),
                    })
                }
            });
        }
        n_rows += 1;
    }

    Ok(EncodedDataset {
        features: Tensor2D::from_vec(n_rows, n_features, data)?,
        labels: has_label.then_some(labels),
        feature_names,
        norm_stats: None,
    })
}
