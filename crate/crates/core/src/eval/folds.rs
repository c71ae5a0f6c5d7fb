use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::substream;

/// Disjoint test sets covering every row once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Folds {
    pub test_sets: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

impl Folds {
    pub fn k(&self) -> usize {
        self.test_sets.len()
    }

    /// Every row not in fold `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let n: usize = self.test_sets.iter().map(Vec::len).sum();
        let mut in_test = vec![false; n];
        for &i in &self.test_sets[fold] {
            in_test[i] = true;
        }
        (0..n).filter(|&i| !in_test[i]).collect()
    }
}

/// Stratified k-fold assignment.
///
/// Each class's rows are shuffled and dealt round-robin into the folds; the
/// dealing position carries over from one class to the next so fold sizes
/// stay within one of each other. Per-class counts per fold differ by at
/// most one. A fold that receives no row of some class gets a warning.
pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<Folds> {
    stratified_folds_for_labels(ds.labels(), ds.class_names(), k, seed)
}

pub fn stratified_folds_for_labels(
    labels: &[usize],
    class_names: &[String],
    k: usize,
    seed: u64,
) -> Result<Folds> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::Data(format!(
            "{k} folds requested for {} rows",
            labels.len()
        )));
    }
    let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut rng = substream(seed, 0);
    let mut test_sets = vec![Vec::new(); k];
    let mut next = 0usize;
    let mut per_class_presence = vec![vec![false; k]; n_classes];
    for (c, presence) in per_class_presence.iter_mut().enumerate() {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if rows.is_empty() {
            continue;
        }
        rows.shuffle(&mut rng);
        for i in rows {
            test_sets[next].push(i);
            presence[next] = true;
            next = (next + 1) % k;
        }
    }
    for set in &mut test_sets {
        set.sort_unstable();
    }
    let mut warnings = Vec::new();
    for (c, presence) in per_class_presence.iter().enumerate() {
        if !presence.iter().any(|&p| p) {
            continue;
        }
        let name = class_names.get(c).cloned().unwrap_or_else(|| c.to_string());
        for (f, &present) in presence.iter().enumerate() {
            if !present {
                warnings.push(format!("fold {f} has no test rows of class `{name}`"));
            }
        }
    }
    Ok(Folds {
        test_sets,
        warnings,
    })
}
