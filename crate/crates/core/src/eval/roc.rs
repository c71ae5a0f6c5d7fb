//! ROC curves over positive-class scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Rows scoring at least this are called positive. `None` for the
    /// starting `(0, 0)` point.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub positive_class: usize,
    pub points: Vec<RocPoint>,
}

/// Sweeps the distinct scores from high to low, emitting one point per
/// distinct score after `(0, 0)`; the last point is `(1, 1)`. Rows with
/// equal scores move together, so the trapezoid under a tied step gives
/// those pairs half credit.
pub fn roc_curve(scores: &[f64], labels: &[usize], positive_class: usize) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Data("ROC scores contain NaN".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == positive_class).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Data(
            "ROC curve needs both positive and negative rows".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: None,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut pos = 0;
    while pos < order.len() {
        let score = scores[order[pos]];
        while pos < order.len() && scores[order[pos]] == score {
            if labels[order[pos]] == positive_class {
                tp += 1;
            } else {
                fp += 1;
            }
            pos += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
            threshold: Some(score),
        });
    }
    Ok(RocCurve {
        positive_class,
        points,
    })
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

/// Writes `fpr,tpr` rows.
pub fn write_roc_csv<W: std::io::Write>(curve: &RocCurve, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["fpr", "tpr"])?;
    for p in &curve.points {
        wtr.write_record([format!("{}", p.fpr), format!("{}", p.tpr)])?;
    }
    wtr.flush().map_err(|e| Error::io("<roc output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_ranking() {
        let c = roc_curve(&[0.9, 0.8, 0.3, 0.2], &[1, 1, 0, 0], 1).unwrap();
        assert!(c.points.iter().any(|p| p.fpr == 0.0 && p.tpr == 1.0));
        assert_eq!(auc(&c), 1.0);
        let last = c.points.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn equal_scores_give_diagonal() {
        let c = roc_curve(&[0.5; 6], &[1, 0, 1, 0, 0, 1], 1).unwrap();
        assert_eq!(c.points.len(), 2);
        assert_eq!(auc(&c), 0.5);
    }

    #[test]
    fn three_of_four_pairs() {
        let c = roc_curve(&[0.9, 0.4, 0.6, 0.2], &[1, 1, 0, 0], 1).unwrap();
        assert!((auc(&c) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn monotone_and_bounded() {
        let c = roc_curve(&[0.1, 0.7, 0.7, 0.3, 0.9], &[0, 1, 0, 1, 0], 1).unwrap();
        for w in c.points.windows(2) {
            assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
        }
        assert!(c
            .points
            .iter()
            .all(|p| (0.0..=1.0).contains(&p.fpr) && (0.0..=1.0).contains(&p.tpr)));
    }

    #[test]
    fn one_class_is_an_error() {
        assert!(roc_curve(&[0.1, 0.2], &[1, 1], 1).is_err());
    }

    #[test]
    fn csv_output() {
        let c = roc_curve(&[0.9, 0.1], &[1, 0], 1).unwrap();
        let mut buf = Vec::new();
        write_roc_csv(&c, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "fpr,tpr\n0,0\n0,1\n1,1\n");
    }
}
