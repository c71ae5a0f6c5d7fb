//! Confusion matrices and the per-class metric suite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[t][p]` is the number of rows of true class `t` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn zeros(n_classes: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.n_classes()).map(|c| self.counts[c][c]).sum()
    }

    pub fn true_positives(&self, c: usize) -> usize {
        self.counts[c][c]
    }

    pub fn false_negatives(&self, c: usize) -> usize {
        self.counts[c].iter().sum::<usize>() - self.counts[c][c]
    }

    pub fn false_positives(&self, c: usize) -> usize {
        self.counts.iter().map(|row| row[c]).sum::<usize>() - self.counts[c][c]
    }

    pub fn true_negatives(&self, c: usize) -> usize {
        self.total() - self.true_positives(c) - self.false_negatives(c) - self.false_positives(c)
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
    }

    /// The matrix after renaming class `c` to `perm[c]`.
    pub fn relabel(&self, perm: &[usize]) -> ConfusionMatrix {
        let mut out = ConfusionMatrix::zeros(self.n_classes());
        for t in 0..self.n_classes() {
            for p in 0..self.n_classes() {
                out.counts[perm[t]][perm[p]] = self.counts[t][p];
            }
        }
        out
    }
}

pub fn confusion(preds: &[usize], labels: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if preds.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    let mut cm = ConfusionMatrix::zeros(n_classes);
    for (&p, &t) in preds.iter().zip(labels) {
        if p >= n_classes || t >= n_classes {
            return Err(Error::Data(format!(
                "label {} out of range for {n_classes} classes",
                p.max(t)
            )));
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// One entry per class, each class in turn taken as the positive class.
    pub per_class: Vec<ClassMetrics>,
    /// Geometric mean of the per-class sensitivities.
    pub g_mean: f64,
    /// Ratios that were 0/0 and were reported as 0.
    pub undefined: Vec<String>,
}

fn ratio(num: usize, den: usize, what: &str, class: usize, undefined: &mut Vec<String>) -> f64 {
    if den == 0 {
        undefined.push(format!("class {class}: {what} is 0/0"));
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy, per-class sensitivity, specificity, precision and F1, and the
/// G-mean. Any 0/0 ratio is reported as 0 and listed in `undefined`.
pub fn class_metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Data("confusion matrix is empty".into()));
    }
    let mut undefined = Vec::new();
    let per_class: Vec<ClassMetrics> = (0..cm.n_classes())
        .map(|c| {
            let tp = cm.true_positives(c);
            let fn_ = cm.false_negatives(c);
            let fp = cm.false_positives(c);
            let tn = cm.true_negatives(c);
            // 2PR/(P+R) rewritten over counts: 2TP / (2TP + FP + FN)
            ClassMetrics {
                sensitivity: ratio(tp, tp + fn_, "sensitivity", c, &mut undefined),
                specificity: ratio(tn, tn + fp, "specificity", c, &mut undefined),
                precision: ratio(tp, tp + fp, "precision", c, &mut undefined),
                f1: ratio(2 * tp, 2 * tp + fp + fn_, "F1", c, &mut undefined),
            }
        })
        .collect();
    let g_mean = g_mean(per_class.iter().map(|m| m.sensitivity));
    Ok(Metrics {
        accuracy: cm.trace() as f64 / total as f64,
        per_class,
        g_mean,
        undefined,
    })
}

fn g_mean(sensitivities: impl Iterator<Item = f64>) -> f64 {
    let s: Vec<f64> = sensitivities.collect();
    match s.len() {
        0 => 0.0,
        2 => (s[0] * s[1]).sqrt(),
        n => s.iter().product::<f64>().powf(1.0 / n as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_for_perfect_predictions() {
        let y = [0, 1, 2, 1, 0];
        let cm = confusion(&y, &y, 3).unwrap();
        assert_eq!(cm.counts, vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
        let m = class_metrics(&cm).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert!(m
            .per_class
            .iter()
            .all(|c| c.sensitivity == 1.0 && c.f1 == 1.0));
        assert_eq!(m.g_mean, 1.0);
    }

    #[test]
    fn binary_hand_count() {
        // TP=3 FN=1 FP=2 TN=4 with class 1 positive
        let labels = [1, 1, 1, 1, 0, 0, 0, 0, 0, 0];
        let preds = [1, 1, 1, 0, 1, 1, 0, 0, 0, 0];
        let cm = confusion(&preds, &labels, 2).unwrap();
        assert_eq!(cm.counts, vec![vec![4, 2], vec![1, 3]]);
        let m = class_metrics(&cm).unwrap();
        let pos = m.per_class[1];
        assert_eq!(pos.sensitivity, 0.75);
        assert!((pos.specificity - 0.6667).abs() < 1e-4);
        assert_eq!(pos.precision, 0.6);
        assert!((pos.f1 - 0.6667).abs() < 1e-4);
        assert!((m.g_mean - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        // one (sens, spec, F1) triple per class
        assert_eq!(m.per_class.len(), 2);
        assert_eq!(m.per_class[0].sensitivity, pos.specificity);
    }

    #[test]
    fn empty_inputs() {
        let cm = confusion(&[], &[], 2).unwrap();
        assert_eq!(cm, ConfusionMatrix::zeros(2));
        assert!(class_metrics(&cm).is_err());
        assert!(confusion(&[2], &[0], 2).is_err());
        assert!(confusion(&[0, 1], &[0], 2).is_err());
    }

    #[test]
    fn zero_over_zero_is_flagged() {
        // nothing ever predicted as class 1
        let cm = confusion(&[0, 0, 0], &[0, 0, 1], 2).unwrap();
        let m = class_metrics(&cm).unwrap();
        assert_eq!(m.per_class[1].precision, 0.0);
        assert!(m.undefined.iter().any(|u| u.contains("precision")));
        assert_eq!(m.g_mean, 0.0);
    }

    #[test]
    fn relabel_transposes_roles() {
        let cm = ConfusionMatrix {
            counts: vec![vec![4, 2], vec![1, 3]],
        };
        let swapped = cm.relabel(&[1, 0]);
        assert_eq!(swapped.counts, vec![vec![3, 1], vec![2, 4]]);
        let a = class_metrics(&cm).unwrap();
        let b = class_metrics(&swapped).unwrap();
        assert_eq!(a.per_class[0], b.per_class[1]);
        assert_eq!(a.per_class[1], b.per_class[0]);
    }
}
