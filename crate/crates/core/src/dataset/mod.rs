//! Tabular datasets: feature schema, CSV ingestion, preprocessing and a
//! seeded synthetic generator.
//!
//! A [`Dataset`] is a dense row-major matrix of `f64` with one class label
//! per row. Missing cells hold `NaN` in the matrix and are tracked by an
//! explicit mask; nothing else in the crate interprets `NaN`.

mod io;
mod preprocess;
mod synth;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_csv, read_csv, read_unlabeled_csv, write_csv, write_csv_to};
pub use preprocess::{
    apply_scale, degenerate_columns, drop_degenerate, fit_imputer, fit_scale, impute, Imputer,
    Preprocessor, ScaleParams,
};
pub use synth::{generate_synthetic, FeatureBlock, GeneratorConfig, Signal};

/// How a column's values are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureKind {
    /// Two integer codes. Kept apart from `Categorical { cardinality: 2 }`
    /// only for reporting.
    Binary,
    Categorical {
        cardinality: u32,
    },
    Continuous,
}

impl FeatureKind {
    pub fn is_continuous(&self) -> bool {
        matches!(self, FeatureKind::Continuous)
    }

    pub fn cardinality(&self) -> Option<u32> {
        match self {
            FeatureKind::Binary => Some(2),
            FeatureKind::Categorical { cardinality } => Some(*cardinality),
            FeatureKind::Continuous => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
    /// Declared `[lo, hi]` of a continuous feature. Informational; values
    /// outside it are accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<(f64, f64)>,
}

impl FeatureSpec {
    pub fn continuous(name: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Continuous,
            range: None,
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Binary,
            range: None,
        }
    }

    pub fn categorical(name: impl Into<String>, cardinality: u32) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Categorical { cardinality },
            range: None,
        }
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Schema("feature with empty name".into()));
        }
        if let FeatureKind::Categorical { cardinality } = self.kind {
            if cardinality < 2 {
                return Err(Error::Schema(format!(
                    "feature `{}`: categorical cardinality must be at least 2",
                    self.name
                )));
            }
        }
        if let Some((lo, hi)) = self.range {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::Schema(format!(
                    "feature `{}`: range [{lo}, {hi}] is empty",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// The schema file: one entry per feature plus the name of the label column.
///
/// ```json
/// {
///   "label_column": "diagnosis",
///   "features": [
///     { "name": "Gender", "kind": "binary" },
///     { "name": "Localization", "kind": "categorical", "cardinality": 5 },
///     { "name": "Age", "kind": "continuous", "range": [2, 54] }
///   ]
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub label_column: String,
    pub features: Vec<FeatureSpec>,
}

impl Schema {
    pub fn new(label_column: impl Into<String>, features: Vec<FeatureSpec>) -> Result<Self> {
        let schema = Schema {
            label_column: label_column.into(),
            features,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for spec in &self.features {
            spec.validate()?;
            if !seen.insert(spec.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature `{}`", spec.name)));
            }
        }
        if seen.contains(self.label_column.as_str()) {
            return Err(Error::Schema(format!(
                "label column `{}` is also listed as a feature",
                self.label_column
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let schema: Schema = serde_json::from_str(text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    n_rows: usize,
    y: Vec<usize>,
    specs: Vec<FeatureSpec>,
    missing: Vec<bool>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from rows. `NaN` cells are recorded as missing.
    pub fn from_rows(
        rows: Vec<Vec<f64>>,
        y: Vec<usize>,
        specs: Vec<FeatureSpec>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_features = specs.len();
        let n_rows = rows.len();
        let mut x = Vec::with_capacity(n_rows * n_features);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::Data(format!(
                    "row {i} has {} values, expected {n_features}",
                    row.len()
                )));
            }
            x.extend(row);
        }
        Self::from_flat(x, y, specs, class_names)
    }

    /// Builds a dataset from a row-major buffer. `NaN` cells are recorded as
    /// missing.
    pub fn from_flat(
        x: Vec<f64>,
        y: Vec<usize>,
        specs: Vec<FeatureSpec>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_features = specs.len();
        let n_rows = y.len();
        if x.len() != n_rows * n_features {
            return Err(Error::Data(format!(
                "matrix has {} cells, expected {n_rows} x {n_features}",
                x.len()
            )));
        }
        if let Some(bad) = y.iter().find(|&&c| c >= class_names.len()) {
            return Err(Error::Data(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        if x.iter().any(|v| v.is_infinite()) {
            return Err(Error::Data("matrix contains an infinite value".into()));
        }
        let missing = x.iter().map(|v| v.is_nan()).collect();
        Ok(Dataset {
            x,
            n_rows,
            y,
            specs,
            missing,
            class_names,
        })
    }

    /// A binary-class dataset of continuous features named `f0, f1, ...`.
    pub fn continuous(rows: Vec<Vec<f64>>, y: Vec<usize>) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        let n_classes = y.iter().max().map_or(2, |&m| (m + 1).max(2));
        let specs = (0..n_features)
            .map(|j| FeatureSpec::continuous(format!("f{j}")))
            .collect();
        let names = (0..n_classes).map(|c| c.to_string()).collect();
        Self::from_rows(rows, y, specs, names)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.specs.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let f = self.n_features();
        &self.x[i * f..(i + 1) * f]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.n_features() + j]
    }

    pub fn is_missing(&self, i: usize, j: usize) -> bool {
        self.missing[i * self.n_features() + j]
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_rows).map(move |i| self.get(i, j))
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn labels(&self) -> &[usize] {
        &self.y
    }

    pub fn specs(&self) -> &[FeatureSpec] {
        &self.specs
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.name.clone()).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts
    }

    /// Class labels that occur at least once.
    pub fn present_classes(&self) -> Vec<usize> {
        self.class_counts()
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(c, _)| c)
            .collect()
    }

    /// A new dataset made of the given rows, in the given order. Indices may
    /// repeat.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let f = self.n_features();
        let mut x = Vec::with_capacity(rows.len() * f);
        let mut missing = Vec::with_capacity(rows.len() * f);
        for &i in rows {
            x.extend_from_slice(self.row(i));
            missing.extend_from_slice(&self.missing[i * f..(i + 1) * f]);
        }
        Dataset {
            x,
            n_rows: rows.len(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            specs: self.specs.clone(),
            missing,
            class_names: self.class_names.clone(),
        }
    }

    /// A new dataset keeping only the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        let f = self.n_features();
        let mut x = Vec::with_capacity(self.n_rows * cols.len());
        let mut missing = Vec::with_capacity(self.n_rows * cols.len());
        for i in 0..self.n_rows {
            for &j in cols {
                x.push(self.x[i * f + j]);
                missing.push(self.missing[i * f + j]);
            }
        }
        Dataset {
            x,
            n_rows: self.n_rows,
            y: self.y.clone(),
            specs: cols.iter().map(|&j| self.specs[j].clone()).collect(),
            missing,
            class_names: self.class_names.clone(),
        }
    }

    /// Appends fully observed rows.
    pub(crate) fn push_rows(&mut self, rows: impl IntoIterator<Item = (Vec<f64>, usize)>) {
        for (row, label) in rows {
            debug_assert_eq!(row.len(), self.n_features());
            self.missing.extend(row.iter().map(|v| v.is_nan()));
            self.x.extend(row);
            self.y.push(label);
            self.n_rows += 1;
        }
    }

    pub(crate) fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64) -> Dataset {
        let nf = self.n_features();
        let x: Vec<f64> = self
            .x
            .iter()
            .enumerate()
            .map(|(idx, &v)| f(idx / nf.max(1), idx % nf.max(1), v))
            .collect();
        let missing = x.iter().map(|v| v.is_nan()).collect();
        Dataset {
            x,
            n_rows: self.n_rows,
            y: self.y.clone(),
            specs: self.specs.clone(),
            missing,
            class_names: self.class_names.clone(),
        }
    }

    /// Replaces the label mapping (same length) without touching the labels.
    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() < self.n_classes() {
            return Err(Error::Data("fewer class names than classes".into()));
        }
        self.class_names = names;
        Ok(self)
    }

    pub fn schema(&self, label_column: impl Into<String>) -> Schema {
        Schema {
            label_column: label_column.into(),
            features: self.specs.clone(),
        }
    }
}
