//! Synthetic minority oversampling.
//!
//! Each synthetic row is `base + gap * (neighbor - base)`, where `base` is a
//! minority row, `neighbor` one of its `k` nearest minority rows and `gap` a
//! single draw from `[0, 1]` shared by every feature. Bases are taken
//! round-robin over the minority rows; the neighbor and gap come from a
//! random substream keyed by the synthetic row's index, so the output does
//! not depend on how the work is scheduled.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapSampling {
    #[default]
    Uniform,
    /// Every synthetic row uses this gap. `Fixed(0.0)` duplicates base rows.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    /// Minority count after oversampling, as a fraction of the majority count.
    pub target_ratio: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "is_uniform")]
    pub gap: GapSampling,
}

fn is_uniform(g: &GapSampling) -> bool {
    *g == GapSampling::Uniform
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_neighbors: 6,
            target_ratio: 1.0,
            seed: 0,
            gap: GapSampling::Uniform,
        }
    }
}

impl SmoteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::Config("SMOTE k_neighbors must be at least 1".into()));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::Config(format!(
                "SMOTE target_ratio {} outside (0, 1]",
                self.target_ratio
            )));
        }
        if let GapSampling::Fixed(g) = self.gap {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::Config(format!("fixed gap {g} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Where a synthetic row came from. Indices refer to rows of the input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProvenance {
    pub base_index: usize,
    pub neighbor_index: usize,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct NeighborTable {
    pub minority_class: usize,
    /// Minority row indices in ascending order.
    pub rows: Vec<usize>,
    /// `neighbors[m]` lists the nearest minority rows of `rows[m]`, closest
    /// first.
    pub neighbors: Vec<Vec<usize>>,
    /// Neighbor count actually used.
    pub k: usize,
    pub warning: Option<String>,
}

/// The smallest present class; on equal counts the higher label.
pub fn minority_class(ds: &Dataset) -> Option<usize> {
    let counts = ds.class_counts();
    ds.present_classes()
        .into_iter()
        .rev()
        .min_by_key(|&c| counts[c])
}

/// Nearest minority-class neighbors of every minority row, by Euclidean
/// distance, excluding the row itself. Distance ties go to the lower row
/// index. `k` is capped at `minority count - 1`.
pub fn minority_neighbors(ds: &Dataset, k: usize) -> Result<NeighborTable> {
    let minority = minority_class(ds).ok_or_else(|| Error::Data("dataset is empty".into()))?;
    let rows: Vec<usize> = (0..ds.n_rows())
        .filter(|&i| ds.labels()[i] == minority)
        .collect();
    if rows.len() < 2 {
        return Err(Error::Data(format!(
            "SMOTE needs at least 2 minority rows, found {}",
            rows.len()
        )));
    }
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let cap = rows.len() - 1;
    let (k, warning) = if k > cap {
        (
            cap,
            Some(format!(
                "k_neighbors {k} exceeds minority count - 1; using {cap}"
            )),
        )
    } else {
        (k, None)
    };
    let neighbors = rows
        .iter()
        .map(|&a| {
            let mut others: Vec<(f64, usize)> = rows
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| (squared_distance(ds.row(a), ds.row(b)), b))
                .collect();
            others.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            others.into_iter().take(k).map(|(_, b)| b).collect()
        })
        .collect();
    Ok(NeighborTable {
        minority_class: minority,
        rows,
        neighbors,
        k,
        warning,
    })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone)]
pub struct SmoteOutput {
    /// Input rows unchanged and in order, followed by the synthetic rows.
    pub dataset: Dataset,
    /// One entry per synthetic row, in the order they were appended.
    pub provenance: Vec<SyntheticProvenance>,
    pub n_original: usize,
    pub warnings: Vec<String>,
}

impl SmoteOutput {
    pub fn is_synthetic(&self, row: usize) -> bool {
        row >= self.n_original
    }
}

/// Balances a two-class dataset by appending
/// `ceil(target_ratio * majority) - minority` synthetic minority rows.
///
/// The input should already be imputed and scaled; distances are computed on
/// the raw matrix. An already balanced input comes back unchanged with empty
/// provenance.
pub fn oversample(ds: &Dataset, cfg: &SmoteConfig) -> Result<SmoteOutput> {
    cfg.validate()?;
    let present = ds.present_classes();
    if present.len() > 2 {
        return Err(Error::Data(format!(
            "SMOTE supports two classes, found {}",
            present.len()
        )));
    }
    if present.len() < 2 {
        return Err(Error::Data("SMOTE needs both classes present".into()));
    }
    if ds.has_missing() {
        return Err(Error::Data(
            "SMOTE input has missing values; impute first".into(),
        ));
    }
    let counts = ds.class_counts();
    let minority = minority_class(ds).expect("two classes present");
    let majority_count = present.iter().map(|&c| counts[c]).max().unwrap_or(0);
    let target = (cfg.target_ratio * majority_count as f64).ceil() as usize;
    let unchanged = SmoteOutput {
        dataset: ds.clone(),
        provenance: Vec::new(),
        n_original: ds.n_rows(),
        warnings: Vec::new(),
    };
    if target <= counts[minority] {
        return Ok(unchanged);
    }
    let n_new = target - counts[minority];

    let table = minority_neighbors(ds, cfg.k_neighbors)?;
    let provenance: Vec<SyntheticProvenance> = (0..n_new)
        .into_par_iter()
        .map(|s| {
            let m = s % table.rows.len();
            let mut rng = substream(cfg.seed, s as u64);
            let nbrs = &table.neighbors[m];
            let neighbor_index = nbrs[rng.random_range(0..nbrs.len())];
            let gap = match cfg.gap {
                GapSampling::Uniform => rng.random::<f64>(),
                GapSampling::Fixed(g) => g,
            };
            SyntheticProvenance {
                base_index: table.rows[m],
                neighbor_index,
                gap,
            }
        })
        .collect();

    let mut out = ds.clone();
    out.push_rows(provenance.iter().map(|p| {
        let base = ds.row(p.base_index);
        let nbr = ds.row(p.neighbor_index);
        let row = base
            .iter()
            .zip(nbr)
            .map(|(b, n)| b + p.gap * (n - b))
            .collect();
        (row, minority)
    }));
    Ok(SmoteOutput {
        dataset: out,
        provenance,
        n_original: ds.n_rows(),
        warnings: table.warning.into_iter().collect(),
    })
}

/// Writes provenance as CSV with columns `base_index,neighbor_index,gap`.
pub fn write_provenance_csv<W: Write>(provenance: &[SyntheticProvenance], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["base_index", "neighbor_index", "gap"])?;
    for p in provenance {
        wtr.write_record([
            p.base_index.to_string(),
            p.neighbor_index.to_string(),
            format!("{}", p.gap),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<provenance>", e))?;
    Ok(())
}

pub fn save_provenance_csv(provenance: &[SyntheticProvenance], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_provenance_csv(provenance, file)
}
