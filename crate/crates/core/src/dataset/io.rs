//! CSV files with a JSON metadata sidecar.
//!
//! The CSV header is the schema feature order followed by `label`; every
//! cell is an integer using the canonical encodings. The sidecar shares the
//! basename and ends in `.meta.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{Dataset, DatasetError, DatasetMeta};
use crate::domain::{build_domain, Case, DomainSchema};

const LABEL_COLUMN: &str = "label";

/// Sidecar path for a dataset file: `cases.csv` -> `cases.meta.json`.
pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let schema = build_domain(dataset.domain());
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    let header: Vec<&str> = schema.feature_names().chain([LABEL_COLUMN]).collect();
    writeln!(out, "{}", header.join(",")).map_err(io_err(path))?;
    let mut line = String::new();
    for case in &dataset.cases {
        line.clear();
        for v in &case.values {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(match case.label {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        });
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))?;

    let meta_file = meta_path(path);
    let json = serde_json::to_string_pretty(&dataset.meta).expect("metadata serializes");
    std::fs::write(&meta_file, json + "\n").map_err(io_err(&meta_file))?;
    Ok(())
}

fn check_header(schema: &DomainSchema, header: &csv::StringRecord) -> Result<(), DatasetError> {
    let names: Vec<&str> = schema.feature_names().collect();
    let found: Vec<&str> = header.iter().collect();
    if found.last() != Some(&LABEL_COLUMN) && found.len() <= names.len() {
        if found.as_slice() == names.as_slice() {
            return Err(DatasetError::MissingColumn(LABEL_COLUMN.to_string()));
        }
    }
    let expected: Vec<&str> = names.iter().copied().chain([LABEL_COLUMN]).collect();
    if found != expected {
        return Err(DatasetError::HeaderMismatch {
            domain: schema.domain(),
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    Ok(())
}

/// Reads a dataset written by [`write_dataset`], validating every row
/// against `schema`.
pub fn read_dataset(path: &Path, schema: &DomainSchema) -> Result<Dataset, DatasetError> {
    let csv_err = |source| DatasetError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    check_header(schema, &header)?;

    let width = schema.width();
    let mut cases = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let mut values = Vec::with_capacity(width);
        for (col, cell) in record.iter().take(width).enumerate() {
            let value = cell
                .trim()
                .parse::<i64>()
                .map_err(|_| DatasetError::NonNumeric {
                    row,
                    column: header[col].to_string(),
                    value: cell.to_string(),
                })?;
            values.push(value);
        }
        let label = match record.get(width).map(str::trim) {
            Some("1") => true,
            Some("0") => false,
            other => {
                return Err(DatasetError::BadLabel {
                    row,
                    value: other.unwrap_or("").to_string(),
                })
            }
        };
        schema
            .validate_values(&values)
            .map_err(|source| DatasetError::InvalidCase { row, source })?;
        cases.push(Case::labeled(values, label));
    }

    let meta_file = meta_path(path);
    let text = std::fs::read_to_string(&meta_file).map_err(io_err(&meta_file))?;
    let meta: DatasetMeta = serde_json::from_str(&text).map_err(|source| DatasetError::Meta {
        path: meta_file.display().to_string(),
        source,
    })?;
    if meta.domain != schema.domain() {
        return Err(DatasetError::MetaDomainMismatch {
            meta: meta.domain,
            schema: schema.domain(),
        });
    }
    Ok(Dataset { meta, cases })
}
