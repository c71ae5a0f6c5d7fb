//! Fits a forest, reports its out-of-bag error and permutation importances,
//! and round-trips it through JSON.
//!
//! ```text
//! cargo run --release --example random_forest
//! ```

use smote_ga_rf::dataset::{generate_synthetic, GeneratorConfig};
use smote_ga_rf::forest::{fit, oob_error, variable_importance, ForestConfig, RandomForest};

fn main() -> smote_ga_rf::Result<()> {
    // three informative columns, five pure noise
    let ds = generate_synthetic(&GeneratorConfig::gaussian([300, 300], 3, 5, 1.0), 2)?;
    let rf = fit(
        &ds,
        &ForestConfig {
            n_trees: 200,
            seed: 7,
            ..ForestConfig::default()
        },
    )?;

    let oob = oob_error(&rf, &ds)?;
    println!(
        "OOB error {:.3} ({} of {} rows covered)",
        oob.error, oob.covered, oob.n_rows
    );
    println!("mean left-out fraction {:.3}", rf.mean_left_out_fraction()?);

    let report = variable_importance(&rf, &ds, 11)?;
    println!("\nrank  feature   importance");
    for f in report.ranked() {
        println!("{:>4}  {:<8}  {:+.4}", f.rank, f.name, f.importance);
    }

    let text = rf.to_json(false);
    let back = RandomForest::from_json(&text)?;
    let same = (0..ds.n_rows()).all(|i| back.predict(ds.row(i)).ok() == rf.predict(ds.row(i)).ok());
    println!(
        "\nsaved {} bytes; reloaded model agrees on every row: {same}",
        text.len()
    );
    Ok(())
}
