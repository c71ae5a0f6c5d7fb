//! Compares SMOTE inside each training fold with SMOTE applied to the whole
//! table before cross-validation. The second leaks test information into
//! training and inflates every score.
//!
//! ```text
//! cargo run --release --example leakage_scopes
//! ```

use smote_ga_rf::dataset::{generate_synthetic, GeneratorConfig};
use smote_ga_rf::eval::{run_pipeline, Mode, PipelineConfig, SmoteScope};

fn main() -> smote_ga_rf::Result<()> {
    let ds = generate_synthetic(&GeneratorConfig::paper_shaped(), 0)?;
    for scope in [SmoteScope::PerFold, SmoteScope::Global] {
        let report = run_pipeline(
            &ds,
            &PipelineConfig {
                mode: Mode::SmoteRf,
                smote_scope: scope,
                ..PipelineConfig::default()
            },
        )?;
        let leaked: usize = report.folds.iter().map(|f| f.synthetic_test_rows).sum();
        println!(
            "{:<8}  rows {:>3}  synthetic rows tested {:>3}  sensitivity[{}] {:.3}  AUC {:.3}",
            scope.as_str(),
            report.n_rows,
            leaked,
            report.positive_class,
            report.positive_metrics().sensitivity,
            report.auc
        );
        for w in report.warnings.iter().filter(|w| w.contains("global")) {
            println!("  {w}");
        }
    }
    Ok(())
}
