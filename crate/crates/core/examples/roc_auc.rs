//! ROC curve and AUC for forest scores on a held-out half, checked against
//! the pairwise ranking statistic.
//!
//! ```text
//! cargo run --release --example roc_auc
//! ```

use smote_ga_rf::dataset::{generate_synthetic, GeneratorConfig};
use smote_ga_rf::eval::{auc, roc_curve, write_roc_csv};
use smote_ga_rf::forest::{fit, ForestConfig};

fn main() -> smote_ga_rf::Result<()> {
    let ds = generate_synthetic(&GeneratorConfig::gaussian([200, 60], 2, 4, 0.8), 5)?;
    let train: Vec<usize> = (0..ds.n_rows()).filter(|i| i % 2 == 0).collect();
    let test: Vec<usize> = (0..ds.n_rows()).filter(|i| i % 2 == 1).collect();
    let (train, test) = (ds.select_rows(&train), ds.select_rows(&test));

    let rf = fit(
        &train,
        &ForestConfig {
            seed: 3,
            ..ForestConfig::default()
        },
    )?;
    let (_, proba) = rf.predict_dataset(&test)?;
    let scores: Vec<f64> = proba.iter().map(|p| p[1]).collect();
    let curve = roc_curve(&scores, test.labels(), 1)?;

    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if test.labels()[i] == 1 && test.labels()[j] == 0 {
                pairs += 1.0;
                wins += if si > sj {
                    1.0
                } else if si == sj {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    println!(
        "{} points, AUC {:.4}, pair statistic {:.4}",
        curve.points.len(),
        auc(&curve),
        wins / pairs
    );
    write_roc_csv(&curve, std::io::stdout())
}
