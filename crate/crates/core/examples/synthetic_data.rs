//! Generates the lesion-shaped synthetic table (47 benign, 7 atypical rows)
//! and shows what preprocessing makes of it.
//!
//! ```text
//! cargo run --example synthetic_data -- [seed]
//! ```

use smote_ga_rf::dataset::{drop_degenerate, generate_synthetic, impute, GeneratorConfig};

fn main() -> smote_ga_rf::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let cfg = GeneratorConfig::paper_shaped();
    let ds = generate_synthetic(&cfg, seed)?;

    println!("{} rows, {} attributes", ds.n_rows(), ds.n_features());
    for (name, count) in ds.class_names().iter().zip(ds.class_counts()) {
        println!("  class {name}: {count}");
    }
    let missing = (0..ds.n_rows())
        .flat_map(|i| (0..ds.n_features()).map(move |j| (i, j)))
        .filter(|&(i, j)| ds.is_missing(i, j))
        .count();
    println!("{missing} missing cells");

    let (usable, dropped) = drop_degenerate(&ds);
    println!("dropped as degenerate: {}", dropped.join(", "));
    let filled = impute(&usable)?;
    println!(
        "{} usable features, missing after imputation: {}",
        filled.n_features(),
        filled.has_missing()
    );

    println!("\nschema:\n{}", cfg.schema()?.to_json());
    Ok(())
}
