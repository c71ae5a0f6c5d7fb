use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Dataset, FeatureKind, Schema};
use crate::error::{Error, Result};

/// Reads a labelled CSV file laid out by `schema`.
///
/// Columns may appear in any order; the result follows schema order. Empty
/// cells are missing values. Class labels are numbered in order of first
/// appearance and the mapping is kept as the dataset's class names.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let table = parse(reader, schema, true)?;
    let raw = table.labels.expect("label column required");
    let mut names: Vec<String> = Vec::new();
    let y = raw
        .into_iter()
        .map(|label| match names.iter().position(|n| *n == label) {
            Some(c) => c,
            None => {
                names.push(label);
                names.len() - 1
            }
        })
        .collect();
    Dataset::from_flat(table.x, y, schema.features.clone(), names)
}

/// Reads a CSV whose label column is optional. The returned dataset has every
/// label set to 0; the raw label strings are returned when the column exists.
pub fn read_unlabeled_csv<R: Read>(
    reader: R,
    schema: &Schema,
) -> Result<(Dataset, Option<Vec<String>>)> {
    let table = parse(reader, schema, false)?;
    let n_rows = table.n_rows;
    let ds = Dataset::from_flat(
        table.x,
        vec![0; n_rows],
        schema.features.clone(),
        vec![String::new()],
    )?;
    Ok((ds, table.labels))
}

struct Table {
    x: Vec<f64>,
    n_rows: usize,
    labels: Option<Vec<String>>,
}

fn parse<R: Read>(reader: R, schema: &Schema, label_required: bool) -> Result<Table> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();

    // feature position in schema -> column position in file
    let mut source = vec![None; schema.features.len()];
    let mut label_pos = None;
    for (pos, name) in header.iter().enumerate() {
        if name == schema.label_column {
            if label_pos.replace(pos).is_some() {
                return Err(Error::Schema(format!("duplicate column `{name}`")));
            }
            continue;
        }
        let j = schema
            .features
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::Schema(format!("unknown column `{name}`")))?;
        if source[j].replace(pos).is_some() {
            return Err(Error::Schema(format!("duplicate column `{name}`")));
        }
    }
    if let Some(j) = source.iter().position(Option::is_none) {
        return Err(Error::Schema(format!(
            "column `{}` missing from header",
            schema.features[j].name
        )));
    }
    if label_required && label_pos.is_none() {
        return Err(Error::Schema(format!(
            "label column `{}` missing from header",
            schema.label_column
        )));
    }

    let mut x = Vec::new();
    let mut labels = label_pos.map(|_| Vec::new());
    let mut n_rows = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        for (spec, pos) in schema.features.iter().zip(&source) {
            let cell = record.get(pos.expect("checked above")).unwrap_or("");
            x.push(parse_cell(cell, spec.kind).map_err(|reason| Error::Cell {
                row,
                column: spec.name.clone(),
                reason,
            })?);
        }
        if let (Some(pos), Some(labels)) = (label_pos, labels.as_mut()) {
            let cell = record.get(pos).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::Cell {
                    row,
                    column: schema.label_column.clone(),
                    reason: "label is missing".into(),
                });
            }
            labels.push(cell.to_string());
        }
        n_rows += 1;
    }
    Ok(Table { x, n_rows, labels })
}

fn parse_cell(cell: &str, kind: FeatureKind) -> std::result::Result<f64, String> {
    if cell.is_empty() {
        return Ok(f64::NAN);
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| format!("`{cell}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{cell}` is not a finite number"));
    }
    if !kind.is_continuous() && v.fract() != 0.0 {
        return Err(format!("`{cell}` is not an integer category code"));
    }
    Ok(v)
}

/// Writes `ds` as CSV: feature columns in order, then the label column
/// holding class names. Missing cells are written empty. Values use Rust's
/// shortest round-trip formatting, so reading the file back reproduces the
/// matrix bit for bit.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(ds, file, label_column)
}

pub fn write_csv_to<W: Write>(ds: &Dataset, writer: W, label_column: &str) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = ds.feature_names();
    header.push(label_column.to_string());
    wtr.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..ds.n_rows() {
        record.clear();
        for j in 0..ds.n_features() {
            if ds.is_missing(i, j) {
                record.push(String::new());
            } else {
                record.push(format!("{}", ds.get(i, j)));
            }
        }
        record.push(ds.class_names()[ds.labels()[i]].clone());
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}
