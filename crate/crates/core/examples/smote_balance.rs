//! Balances a preprocessed two-class table with SMOTE and checks that every
//! synthetic row lies between its base row and the chosen neighbor.
//!
//! ```text
//! cargo run --example smote_balance -- [k]
//! ```

use smote_ga_rf::dataset::{generate_synthetic, GeneratorConfig, Preprocessor};
use smote_ga_rf::smote::{oversample, write_provenance_csv, SmoteConfig};

fn main() -> smote_ga_rf::Result<()> {
    let k = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(6);
    let raw = generate_synthetic(&GeneratorConfig::paper_shaped(), 0)?;
    let ds = Preprocessor::fit(&raw)?.transform(&raw)?;

    let out = oversample(
        &ds,
        &SmoteConfig {
            k_neighbors: k,
            seed: 1,
            ..SmoteConfig::default()
        },
    )?;
    for w in &out.warnings {
        println!("warning: {w}");
    }
    println!("before: {:?}", ds.class_counts());
    println!("after:  {:?}", out.dataset.class_counts());

    let mut worst: f64 = 0.0;
    for (s, p) in out.provenance.iter().enumerate() {
        let row = out.dataset.row(out.n_original + s);
        let (a, b) = (ds.row(p.base_index), ds.row(p.neighbor_index));
        for j in 0..row.len() {
            let (lo, hi) = (a[j].min(b[j]), a[j].max(b[j]));
            worst = worst.max(lo - row[j]).max(row[j] - hi);
        }
    }
    println!("largest excursion outside the base/neighbor box: {worst:e}");

    println!("\nfirst synthetic rows:");
    let mut buf = Vec::new();
    write_provenance_csv(&out.provenance[..5.min(out.provenance.len())], &mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));
    Ok(())
}
