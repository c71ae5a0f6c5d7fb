//! Runs the three configurations (forest alone, SMOTE + forest, SMOTE + GA +
//! forest) under 10-fold cross-validation on the lesion-shaped synthetic data
//! and prints one comparison row per configuration.
//!
//! ```text
//! cargo run --release --example mode_ablation -- [seed] [generations]
//! ```

use std::time::Instant;

use smote_ga_rf::dataset::{generate_synthetic, GeneratorConfig};
use smote_ga_rf::eval::{run_pipeline, write_comparison_csv, Mode, PipelineConfig};
use smote_ga_rf::gafs::GaConfig;

fn main() -> smote_ga_rf::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let generations: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);

    let ds = generate_synthetic(&GeneratorConfig::paper_shaped(), seed)?;
    let mut reports = Vec::new();
    for mode in Mode::ALL {
        let cfg = PipelineConfig {
            mode,
            seed,
            ga: GaConfig {
                generations,
                ..GaConfig::default()
            },
            ..PipelineConfig::default()
        };
        let start = Instant::now();
        let report = run_pipeline(&ds, &cfg)?;
        let pos = report.positive_metrics();
        eprintln!(
            "{:<12} sens({}) {:.3}  auc {:.3}  {:.1}s",
            mode.as_str(),
            report.positive_class,
            pos.sensitivity,
            report.auc,
            start.elapsed().as_secs_f64()
        );
        if !report.consensus_features.is_empty() {
            eprintln!(
                "  consensus features: {}",
                report.consensus_features.join(", ")
            );
        }
        reports.push(report);
    }
    write_comparison_csv(&reports, std::io::stdout())
}
