//! GA wrapper selection on data with four informative and eight noise
//! columns, with forest accuracy as fitness.
//!
//! ```text
//! cargo run --release --example ga_feature_selection -- [generations]
//! ```

use smote_ga_rf::dataset::{generate_synthetic, GeneratorConfig};
use smote_ga_rf::forest::ForestConfig;
use smote_ga_rf::gafs::{run_ga, FitnessMode, FitnessSpec, GaConfig};

fn main() -> smote_ga_rf::Result<()> {
    let generations = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(15);
    let ds = generate_synthetic(&GeneratorConfig::gaussian([60, 60], 4, 8, 1.0), 3)?;
    let cfg = GaConfig {
        population_size: 30,
        generations,
        seed: 1,
        ..GaConfig::default()
    };
    let spec = FitnessSpec {
        mode: FitnessMode::CvAccuracy { folds: 3 },
        rf_config: ForestConfig {
            n_trees: 30,
            ..ForestConfig::default()
        },
        fitness_seed: 2,
    };
    let result = run_ga(&ds, &cfg, &spec)?;

    println!("generation  best    mean");
    for g in &result.history {
        println!(
            "{:>10}  {:.4}  {:.4}  {}",
            g.generation, g.best_fitness, g.mean_fitness, g.best_mask
        );
    }
    println!(
        "\nbest fitness {:.4} with {:?}",
        result.best_fitness,
        result.best_mask.selected_names(&ds.feature_names())
    );
    println!("{} distinct masks evaluated", result.evaluations);
    Ok(())
}
