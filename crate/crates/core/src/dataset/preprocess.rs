//! Imputation, min-max scaling and removal of uninformative columns.
//!
//! Each step is split into a fit on training rows and an application to any
//! rows, so cross-validation can fit on the training partition only.

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Per-column fill values learned from observed cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    pub fill: Vec<f64>,
}

/// Learns fill values: the mean for continuous columns, the mode for binary
/// and categorical columns (ties go to the smallest code).
pub fn fit_imputer(ds: &Dataset) -> Result<Imputer> {
    let fill = (0..ds.n_features())
        .map(|j| {
            let observed: Vec<f64> = (0..ds.n_rows())
                .filter(|&i| !ds.is_missing(i, j))
                .map(|i| ds.get(i, j))
                .collect();
            if observed.is_empty() {
                return Err(Error::Data(format!(
                    "column `{}` has no observed values; remove it with drop_degenerate first",
                    ds.specs()[j].name
                )));
            }
            Ok(if ds.specs()[j].kind.is_continuous() {
                observed.iter().sum::<f64>() / observed.len() as f64
            } else {
                mode(observed)
            })
        })
        .collect::<Result<_>>()?;
    Ok(Imputer { fill })
}

fn mode(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let mut best = (values[0], 0usize);
    let mut run = (values[0], 0usize);
    for v in values {
        if v == run.0 {
            run.1 += 1;
        } else {
            run = (v, 1);
        }
        // strict: an equal count later in sorted order never wins
        if run.1 > best.1 {
            best = run;
        }
    }
    best.0
}

impl Imputer {
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        check_width(self.fill.len(), ds)?;
        Ok(ds.map_values(|i, j, v| if ds.is_missing(i, j) { self.fill[j] } else { v }))
    }
}

/// Fills every missing cell from the dataset's own observed values.
pub fn impute(ds: &Dataset) -> Result<Dataset> {
    fit_imputer(ds)?.apply(ds)
}

/// Per-feature `(min, max)` learned from data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScaleParams {
    pub fn is_degenerate(&self, j: usize) -> bool {
        self.max[j] <= self.min[j]
    }

    pub fn scale(&self, j: usize, v: f64) -> f64 {
        if self.is_degenerate(j) {
            0.0
        } else {
            (v - self.min[j]) / (self.max[j] - self.min[j])
        }
    }
}

/// Column minima and maxima over observed cells. A column with no observed
/// cells gets `(0, 0)` and is treated as degenerate.
pub fn fit_scale(ds: &Dataset) -> ScaleParams {
    let f = ds.n_features();
    let mut min = vec![f64::INFINITY; f];
    let mut max = vec![f64::NEG_INFINITY; f];
    for i in 0..ds.n_rows() {
        for j in 0..f {
            if !ds.is_missing(i, j) {
                let v = ds.get(i, j);
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
    }
    for j in 0..f {
        if min[j] > max[j] {
            min[j] = 0.0;
            max[j] = 0.0;
        }
    }
    ScaleParams { min, max }
}

/// Maps `v` to `(v - min) / (max - min)`; degenerate columns map to 0.
/// Rows outside the fitted range land outside `[0, 1]`.
pub fn apply_scale(ds: &Dataset, params: &ScaleParams) -> Result<Dataset> {
    check_width(params.min.len(), ds)?;
    Ok(ds.map_values(|_, j, v| if v.is_nan() { v } else { params.scale(j, v) }))
}

/// Columns that are fully missing or whose observed values are all equal.
pub fn degenerate_columns(ds: &Dataset) -> Vec<usize> {
    let params = fit_scale(ds);
    (0..ds.n_features())
        .filter(|&j| params.is_degenerate(j))
        .collect()
}

/// Removes degenerate columns and returns the names of the removed ones.
///
/// Imputation fills a column with its mean or mode, so a column is constant
/// after imputation exactly when its observed values are constant; this can
/// run before or after [`impute`].
pub fn drop_degenerate(ds: &Dataset) -> (Dataset, Vec<String>) {
    let dropped = degenerate_columns(ds);
    if dropped.is_empty() {
        return (ds.clone(), Vec::new());
    }
    let keep: Vec<usize> = (0..ds.n_features())
        .filter(|j| !dropped.contains(j))
        .collect();
    let names = dropped
        .iter()
        .map(|&j| ds.specs()[j].name.clone())
        .collect();
    (ds.select_columns(&keep), names)
}

fn check_width(expected: usize, ds: &Dataset) -> Result<()> {
    if expected != ds.n_features() {
        return Err(Error::Schema(format!(
            "fitted on {expected} features, data has {}",
            ds.n_features()
        )));
    }
    Ok(())
}

/// Drop-degenerate, impute and scale, fitted together on one set of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub input_features: Vec<String>,
    pub kept: Vec<usize>,
    pub dropped: Vec<String>,
    pub imputer: Imputer,
    pub scale: ScaleParams,
}

impl Preprocessor {
    pub fn fit(ds: &Dataset) -> Result<Self> {
        let degenerate = degenerate_columns(ds);
        let kept: Vec<usize> = (0..ds.n_features())
            .filter(|j| !degenerate.contains(j))
            .collect();
        let reduced = ds.select_columns(&kept);
        let imputer = fit_imputer(&reduced)?;
        let scale = fit_scale(&imputer.apply(&reduced)?);
        Ok(Preprocessor {
            input_features: ds.feature_names(),
            kept,
            dropped: degenerate
                .iter()
                .map(|&j| ds.specs()[j].name.clone())
                .collect(),
            imputer,
            scale,
        })
    }

    pub fn transform(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.feature_names() != self.input_features {
            return Err(Error::Schema(format!(
                "expected features {:?}, got {:?}",
                self.input_features,
                ds.feature_names()
            )));
        }
        let reduced = ds.select_columns(&self.kept);
        apply_scale(&self.imputer.apply(&reduced)?, &self.scale)
    }

    pub fn kept_names(&self) -> Vec<String> {
        self.kept
            .iter()
            .map(|&j| self.input_features[j].clone())
            .collect()
    }
}
