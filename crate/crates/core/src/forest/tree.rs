//! Entropy-based classification trees.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Gains within this distance of each other count as tied.
pub const GAIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        class_label: usize,
        class_counts: Vec<usize>,
    },
    /// Rows with `value <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    fn leaf(class_counts: Vec<usize>) -> Self {
        TreeNode::Leaf {
            class_label: argmax(&class_counts),
            class_counts,
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { class_label, .. } => return *class_label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    /// Marks every feature index this tree splits on.
    pub fn mark_used_features(&self, used: &mut [bool]) {
        if let TreeNode::Split {
            feature,
            left,
            right,
            ..
        } = self
        {
            used[*feature] = true;
            left.mark_used_features(used);
            right.mark_used_features(used);
        }
    }
}

/// Index of the largest count; ties go to the lower index.
pub(crate) fn argmax(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Shannon entropy in bits of a class-count vector.
pub fn entropy(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::Data("entropy of an empty count vector".into()));
    }
    Ok(entropy_of(counts, total))
}

fn entropy_of(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Best information-gain split of `rows` over `candidates`.
///
/// Thresholds are midpoints between consecutive distinct values. Ties go to
/// the lower feature index, then the lower threshold. Returns `None` when no
/// split has positive gain.
pub fn best_split(ds: &Dataset, rows: &[usize], candidates: &[usize]) -> Option<Split> {
    find_split(ds, rows, candidates, 1)
}

/// [`best_split`] restricted to splits leaving at least `min_leaf` rows on
/// each side.
pub fn find_split(
    ds: &Dataset,
    rows: &[usize],
    candidates: &[usize],
    min_leaf: usize,
) -> Option<Split> {
    let n_classes = ds.n_classes();
    let labels = ds.labels();
    let mut parent = vec![0usize; n_classes];
    for &i in rows {
        parent[labels[i]] += 1;
    }
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let parent_entropy = entropy_of(&parent, n);
    if parent_entropy <= 0.0 {
        return None;
    }
    // n * H(counts) = L(n) - sum L(c) with L(x) = x log2 x, tabulated once
    // so the scan below does no logarithms.
    let xlogx: Vec<f64> = (0..=n)
        .map(|x| {
            if x == 0 {
                0.0
            } else {
                x as f64 * (x as f64).log2()
            }
        })
        .collect();
    let weighted = |counts: &[usize], total: usize| {
        xlogx[total] - counts.iter().map(|&c| xlogx[c]).sum::<f64>()
    };

    let mut sorted_features = candidates.to_vec();
    sorted_features.sort_unstable();
    sorted_features.dedup();

    let mut best: Option<Split> = None;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0usize; n_classes];
    let mut right = vec![0usize; n_classes];
    for feature in sorted_features {
        pairs.clear();
        pairs.extend(rows.iter().map(|&i| (ds.get(i, feature), labels[i])));
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(&parent);
        for pos in 0..n - 1 {
            let (v, label) = pairs[pos];
            left[label] += 1;
            right[label] -= 1;
            let next = pairs[pos + 1].0;
            if v == next {
                continue;
            }
            let n_left = pos + 1;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let gain =
                parent_entropy - (weighted(&left, n_left) + weighted(&right, n_right)) / n as f64;
            if best.is_none_or(|b| gain > b.gain + GAIN_TOLERANCE) {
                best = Some(Split {
                    feature,
                    threshold: midpoint(v, next),
                    gain,
                });
            }
        }
    }
    best.filter(|s| s.gain > GAIN_TOLERANCE)
}

/// Midpoint that still separates `lo` from `hi` under `<=`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

/// Resolved tree-growing parameters.
#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub features_per_node: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

/// Grows a tree on `rows` (indices may repeat). At each node
/// `features_per_node` candidate features are drawn without replacement.
/// Leaves store the class counts of the rows that reached them.
pub fn grow_tree<R: Rng>(
    ds: &Dataset,
    rows: &[usize],
    params: &TreeParams,
    rng: &mut R,
) -> TreeNode {
    grow(ds, rows.to_vec(), 0, params, rng)
}

fn grow<R: Rng>(
    ds: &Dataset,
    rows: Vec<usize>,
    depth: usize,
    params: &TreeParams,
    rng: &mut R,
) -> TreeNode {
    let mut counts = vec![0usize; ds.n_classes()];
    for &i in &rows {
        counts[ds.labels()[i]] += 1;
    }
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let min_leaf = params.min_samples_leaf.max(1);
    if pure || rows.len() < 2 * min_leaf || params.max_depth.is_some_and(|d| depth >= d) {
        return TreeNode::leaf(counts);
    }
    let f = ds.n_features();
    let k = params.features_per_node.clamp(1, f);
    let candidates: Vec<usize> = if k == f {
        (0..f).collect()
    } else {
        index::sample(rng, f, k).into_vec()
    };
    let Some(split) = find_split(ds, &rows, &candidates, min_leaf) else {
        return TreeNode::leaf(counts);
    };
    let (left, right): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&i| ds.get(i, split.feature) <= split.threshold);
    let left = grow(ds, left, depth + 1, params, rng);
    let right = grow(ds, right, depth + 1, params, rng);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}
