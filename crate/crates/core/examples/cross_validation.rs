//! Stratified folds on the 47/7 class split and the pooled metric suite of
//! a plain forest.
//!
//! ```text
//! cargo run --release --example cross_validation
//! ```

use smote_ga_rf::dataset::{generate_synthetic, GeneratorConfig};
use smote_ga_rf::eval::{run_pipeline, stratified_folds, Mode, PipelineConfig};

fn main() -> smote_ga_rf::Result<()> {
    let ds = generate_synthetic(&GeneratorConfig::paper_shaped(), 0)?;
    let folds = stratified_folds(&ds, 10, 0)?;
    for (f, set) in folds.test_sets.iter().enumerate() {
        let minority = set.iter().filter(|&&i| ds.labels()[i] == 1).count();
        println!(
            "fold {f}: {} rows, {minority} {}",
            set.len(),
            ds.class_names()[1]
        );
    }
    for w in &folds.warnings {
        println!("warning: {w}");
    }

    let report = run_pipeline(
        &ds,
        &PipelineConfig {
            mode: Mode::RfOnly,
            ..PipelineConfig::default()
        },
    )?;
    println!(
        "\npooled confusion (rows = truth): {:?}",
        report.confusion.counts
    );
    println!(
        "accuracy {:.4}  G-mean {:.4}  AUC {:.4}",
        report.accuracy, report.g_mean, report.auc
    );
    for m in &report.per_class {
        println!(
            "  {:<4} sensitivity {:.4}  specificity {:.4}  F1 {:.4}",
            m.class, m.sensitivity, m.specificity, m.f1
        );
    }
    for u in &report.undefined_metrics {
        println!("  note: {u}, reported as 0");
    }
    Ok(())
}
