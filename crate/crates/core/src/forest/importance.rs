//! Permutation variable importance on out-of-bag rows.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::RandomForest;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub index: usize,
    pub name: String,
    /// Mean drop in per-tree OOB accuracy when the feature is permuted.
    pub importance: f64,
    /// 1 = most important. Ties go to the lower feature index.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    /// In feature order.
    pub features: Vec<FeatureImportance>,
    /// Trees that had at least one OOB row.
    pub trees_used: usize,
}

impl ImportanceReport {
    /// Features from most to least important.
    pub fn ranked(&self) -> Vec<&FeatureImportance> {
        let mut v: Vec<_> = self.features.iter().collect();
        v.sort_by_key(|f| f.rank);
        v
    }
}

/// For every tree and feature, shuffles that feature among the tree's OOB
/// rows and records the drop in the tree's OOB accuracy; importances are
/// the drops averaged over trees. A feature a tree never splits on cannot
/// change its predictions and contributes exactly 0.
pub fn variable_importance(rf: &RandomForest, ds: &Dataset, seed: u64) -> Result<ImportanceReport> {
    if ds.n_rows() != rf.n_train_rows || ds.n_features() != rf.n_features() {
        return Err(Error::Schema(
            "importance needs the dataset the forest was trained on".into(),
        ));
    }
    let mask = rf.out_of_bag_mask()?;
    let f = rf.n_features();
    let mut totals = vec![0.0; f];
    let mut trees_used = 0usize;
    let mut row = vec![0.0; f];
    for (t, (tree, oob)) in rf.trees.iter().zip(&mask).enumerate() {
        let rows: Vec<usize> = (0..ds.n_rows()).filter(|&i| oob[i]).collect();
        if rows.is_empty() {
            continue;
        }
        trees_used += 1;
        let n = rows.len() as f64;
        let correct = |r: &[usize], permuted: Option<(usize, &[f64])>, buf: &mut Vec<f64>| {
            r.iter()
                .enumerate()
                .filter(|&(pos, &i)| {
                    buf.copy_from_slice(ds.row(i));
                    if let Some((j, values)) = permuted {
                        buf[j] = values[pos];
                    }
                    tree.predict(buf) == ds.labels()[i]
                })
                .count()
        };
        let baseline = correct(&rows, None, &mut row) as f64 / n;
        let mut used = vec![false; f];
        tree.mark_used_features(&mut used);
        let tree_seed = derive_seed(seed, t as u64);
        for j in (0..f).filter(|&j| used[j]) {
            let mut values: Vec<f64> = rows.iter().map(|&i| ds.get(i, j)).collect();
            values.shuffle(&mut substream(tree_seed, j as u64));
            let permuted = correct(&rows, Some((j, &values)), &mut row) as f64 / n;
            totals[j] += baseline - permuted;
        }
    }
    let denom = trees_used.max(1) as f64;
    let importance: Vec<f64> = totals.iter().map(|t| t / denom).collect();
    let mut order: Vec<usize> = (0..f).collect();
    order.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    let mut rank = vec![0; f];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r + 1;
    }
    Ok(ImportanceReport {
        features: (0..f)
            .map(|j| FeatureImportance {
                index: j,
                name: rf.feature_names[j].clone(),
                importance: importance[j],
                rank: rank[j],
            })
            .collect(),
        trees_used,
    })
}
