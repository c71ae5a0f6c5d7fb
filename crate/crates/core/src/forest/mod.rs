//! Random forest classifier.
//!
//! Trees are grown on bootstrap samples with a fresh random subset of
//! candidate features at every node and vote by simple majority. Each tree
//! draws from its own random substream keyed by `(seed, tree index)`, so a
//! forest is identical whatever the thread count.

mod importance;
mod persist;
pub mod tree;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::substream;

pub use importance::{variable_importance, FeatureImportance, ImportanceReport};
pub(crate) use persist::from_json_unbounded;
pub use persist::{ForestDocument, FOREST_FORMAT_VERSION};
pub use tree::{best_split, entropy, find_split, grow_tree, Split, TreeNode, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureRule {
    /// `floor(sqrt(f))`, at least 1.
    Sqrt,
    All,
}

/// Candidate features drawn at each node: a rule or a fixed count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeaturesPerNode {
    Count(usize),
    Rule(FeatureRule),
}

impl FeaturesPerNode {
    pub fn resolve(&self, n_features: usize) -> Result<usize> {
        let k = match self {
            FeaturesPerNode::Rule(FeatureRule::Sqrt) => {
                ((n_features as f64).sqrt().floor() as usize).max(1)
            }
            FeaturesPerNode::Rule(FeatureRule::All) => n_features,
            FeaturesPerNode::Count(k) => *k,
        };
        if k == 0 || k > n_features {
            return Err(Error::Config(format!(
                "features_per_node {k} must be in 1..={n_features}"
            )));
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub features_per_node: FeaturesPerNode,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    /// When false every tree sees each training row exactly once, which
    /// leaves no out-of-bag rows.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            features_per_node: FeaturesPerNode::Rule(FeatureRule::Sqrt),
            min_samples_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Config("min_samples_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub config: ForestConfig,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub n_train_rows: usize,
    pub trees: Vec<TreeNode>,
    /// Per tree, the sorted bootstrap row indices (with repeats). Empty after
    /// loading a model saved without them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub in_bag: Vec<Vec<usize>>,
}

/// Out-of-bag error and how many rows it covers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OobEstimate {
    pub error: f64,
    /// Rows left out of at least one tree.
    pub covered: usize,
    pub n_rows: usize,
}

impl OobEstimate {
    pub fn coverage(&self) -> f64 {
        self.covered as f64 / self.n_rows as f64
    }
}

/// Fits a forest on a fully observed dataset with at least two classes.
pub fn fit(ds: &Dataset, cfg: &ForestConfig) -> Result<RandomForest> {
    cfg.validate()?;
    if ds.n_rows() == 0 {
        return Err(Error::Data("cannot fit a forest on zero rows".into()));
    }
    if ds.n_features() == 0 {
        return Err(Error::Data("cannot fit a forest on zero features".into()));
    }
    if ds.present_classes().len() < 2 {
        return Err(Error::Data("training data has a single class".into()));
    }
    if ds.has_missing() {
        return Err(Error::Data("training data has missing values".into()));
    }
    let params = TreeParams {
        features_per_node: cfg.features_per_node.resolve(ds.n_features())?,
        min_samples_leaf: cfg.min_samples_leaf,
        max_depth: cfg.max_depth,
    };
    let n = ds.n_rows();
    let grown: Vec<(TreeNode, Vec<usize>)> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(cfg.seed, t as u64);
            let rows: Vec<usize> = if cfg.bootstrap {
                let mut rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                rows.sort_unstable();
                rows
            } else {
                (0..n).collect()
            };
            (grow_tree(ds, &rows, &params, &mut rng), rows)
        })
        .collect();
    let (trees, in_bag) = grown.into_iter().unzip();
    Ok(RandomForest {
        config: cfg.clone(),
        class_names: ds.class_names().to_vec(),
        feature_names: ds.feature_names(),
        n_train_rows: n,
        trees,
        in_bag,
    })
}

impl RandomForest {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_features() {
            return Err(Error::Schema(format!(
                "row has {} features, forest expects {}",
                row.len(),
                self.n_features()
            )));
        }
        Ok(())
    }

    pub(crate) fn votes(&self, row: &[f64]) -> Vec<usize> {
        let mut votes = vec![0usize; self.n_classes()];
        for tree in &self.trees {
            votes[tree.predict(row)] += 1;
        }
        votes
    }

    /// Fraction of trees voting for each class.
    pub fn predict_proba(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_row(row)?;
        let k = self.trees.len() as f64;
        Ok(self.votes(row).into_iter().map(|v| v as f64 / k).collect())
    }

    /// Majority vote; ties go to the lower label.
    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        self.check_row(row)?;
        Ok(tree::argmax(&self.votes(row)))
    }

    /// Labels and class-probability rows for every row of `ds`.
    pub fn predict_dataset(&self, ds: &Dataset) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
        if ds.n_features() != self.n_features() {
            return Err(Error::Schema(format!(
                "data has {} features, forest expects {}",
                ds.n_features(),
                self.n_features()
            )));
        }
        let k = self.trees.len() as f64;
        Ok((0..ds.n_rows())
            .map(|i| {
                let votes = self.votes(ds.row(i));
                let label = tree::argmax(&votes);
                (label, votes.into_iter().map(|v| v as f64 / k).collect())
            })
            .unzip())
    }

    /// `oob[t][i]` is true when row `i` is absent from tree `t`'s bootstrap.
    pub(crate) fn out_of_bag_mask(&self) -> Result<Vec<Vec<bool>>> {
        if self.in_bag.len() != self.trees.len() {
            return Err(Error::Model(
                "forest has no in-bag bookkeeping; refit or load a model saved with it".into(),
            ));
        }
        Ok(self
            .in_bag
            .iter()
            .map(|rows| {
                let mut oob = vec![true; self.n_train_rows];
                for &i in rows {
                    oob[i] = false;
                }
                oob
            })
            .collect())
    }

    /// Fraction of distinct training rows each tree left out, averaged over
    /// trees.
    pub fn mean_left_out_fraction(&self) -> Result<f64> {
        let mask = self.out_of_bag_mask()?;
        let total: f64 = mask
            .iter()
            .map(|oob| oob.iter().filter(|&&b| b).count() as f64 / self.n_train_rows as f64)
            .sum();
        Ok(total / mask.len() as f64)
    }
}

/// Misclassification rate where each training row is predicted only by the
/// trees that did not see it. Rows left out of no tree are skipped and
/// reported through the coverage figure.
pub fn oob_error(rf: &RandomForest, ds: &Dataset) -> Result<OobEstimate> {
    if ds.n_rows() != rf.n_train_rows || ds.n_features() != rf.n_features() {
        return Err(Error::Schema(
            "OOB error needs the dataset the forest was trained on".into(),
        ));
    }
    let mask = rf.out_of_bag_mask()?;
    let mut wrong = 0usize;
    let mut covered = 0usize;
    for i in 0..ds.n_rows() {
        let mut votes = vec![0usize; rf.n_classes()];
        let mut any = false;
        for (tree, oob) in rf.trees.iter().zip(&mask) {
            if oob[i] {
                votes[tree.predict(ds.row(i))] += 1;
                any = true;
            }
        }
        if any {
            covered += 1;
            if tree::argmax(&votes) != ds.labels()[i] {
                wrong += 1;
            }
        }
    }
    if covered == 0 {
        return Err(Error::Data(
            "no row is out of bag for any tree; use more trees or enable bootstrap".into(),
        ));
    }
    Ok(OobEstimate {
        error: wrong as f64 / covered as f64,
        covered,
        n_rows: ds.n_rows(),
    })
}
