//! Worked examples for the individual operations, run through the public API.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smote_ga_rf::dataset::{
    generate_synthetic, read_csv, write_csv_to, GeneratorConfig, Preprocessor,
};
use smote_ga_rf::eval::{auc, roc_curve, run_pipeline, Mode, PipelineConfig};
use smote_ga_rf::forest::{fit, ForestConfig};
use smote_ga_rf::gafs::{
    evaluate_fitness, init_population, mutate, run_ga, tournament_select, FeatureMask, FitnessSpec,
    GaConfig,
};

fn lesion_data() -> smote_ga_rf::dataset::Dataset {
    generate_synthetic(&GeneratorConfig::paper_shaped(), 0).unwrap()
}

#[test]
fn lesion_table_loads_with_all_attributes() {
    let ds = lesion_data();
    let mut buf = Vec::new();
    write_csv_to(&ds, &mut buf, "class").unwrap();
    let back = read_csv(buf.as_slice(), &ds.schema("class")).unwrap();
    assert_eq!((back.n_rows(), back.n_features()), (54, 29));
    let pre = Preprocessor::fit(&back).unwrap();
    assert_eq!(pre.dropped, ["P16", "ALK Fish"]);
    assert_eq!(pre.kept.len(), 27);
}

#[test]
fn initial_population_shape() {
    let pop = init_population(&GaConfig::default(), 27).unwrap();
    assert_eq!(pop.len(), 100);
    assert!(pop.iter().all(|m| m.len() == 27 && m.count_selected() >= 1));
    let single = init_population(&GaConfig::default(), 1).unwrap();
    assert!(single.iter().all(|m| m.bits() == [true]));
}

#[test]
fn mutation_flip_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let base = FeatureMask::all(27);
    let trials = 10_000;
    let flips: usize = (0..trials)
        .map(|_| {
            let m = mutate(&base, 0.1, &mut rng);
            m.bits().iter().filter(|&&b| !b).count()
        })
        .sum();
    let mean = flips as f64 / trials as f64;
    assert!((2.5..=2.9).contains(&mean), "mean flips {mean}");
}

#[test]
fn full_tournament_win_rate() {
    // Draws are with replacement, so a tournament as large as the population
    // holds the best individual with probability 1 - (1 - 1/n)^n, and wins
    // whenever it does.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 5;
    let pop: Vec<FeatureMask> = (0..n).map(|_| FeatureMask::all(3)).collect();
    let fitness = [0.3, 0.9, 0.1, 0.5, 0.7];
    let trials = 20_000;
    let wins = (0..trials)
        .filter(|_| tournament_select(&pop, &fitness, n, &mut rng) == 1)
        .count();
    let expected = 1.0 - (1.0 - 1.0 / n as f64).powi(n as i32);
    let rate = wins as f64 / trials as f64;
    assert!((rate - expected).abs() < 0.02, "rate {rate} vs {expected}");
    // the worst individual can only win a tournament that drew nothing else
    let worst = (0..trials)
        .filter(|_| tournament_select(&pop, &fitness, n, &mut rng) == 2)
        .count();
    let alone = (1.0 / n as f64).powi(n as i32);
    assert!((worst as f64 / trials as f64) < alone + 0.002);
}

#[test]
fn fitness_tracks_information_content() {
    let cfg = GeneratorConfig::gaussian([70, 30], 4, 8, 4.0);
    let ds = generate_synthetic(&cfg, 3).unwrap();
    let spec = FitnessSpec::default();
    let noise = FeatureMask::new((0..12).map(|j| j >= 4).collect());
    let informative = FeatureMask::new((0..12).map(|j| j < 4).collect());
    let f_noise = evaluate_fitness(&noise, &ds, &spec).unwrap();
    let f_info = evaluate_fitness(&informative, &ds, &spec).unwrap();
    assert!((f_noise - 0.7).abs() <= 0.1, "noise-only fitness {f_noise}");
    assert!(f_info >= 0.95, "informative fitness {f_info}");
    assert_eq!(
        evaluate_fitness(&informative, &ds, &spec)
            .unwrap()
            .to_bits(),
        f_info.to_bits()
    );
}

#[test]
fn default_ga_on_lesion_data() {
    let raw = lesion_data();
    let ds = Preprocessor::fit(&raw).unwrap().transform(&raw).unwrap();
    let result = run_ga(&ds, &GaConfig::default(), &FitnessSpec::default()).unwrap();
    assert_eq!(result.history.len(), 51);
    let k = result.best_mask.count_selected();
    assert!((1..=27).contains(&k));
    assert_eq!(result.best_mask.len(), 27);
    assert!(result
        .history
        .windows(2)
        .all(|w| w[1].best_fitness >= w[0].best_fitness));
    assert_eq!(
        result.history.last().unwrap().best_fitness,
        result.best_fitness
    );
}

#[test]
fn bootstrap_leave_out_on_lesion_data() {
    let raw = lesion_data();
    let ds = Preprocessor::fit(&raw).unwrap().transform(&raw).unwrap();
    let rf = fit(&ds, &ForestConfig::default()).unwrap();
    assert_eq!(rf.trees.len(), 100);
    let left_out = rf.mean_left_out_fraction().unwrap();
    assert!((left_out - 0.368).abs() <= 0.05, "{left_out}");
    let again = fit(&ds, &ForestConfig::default()).unwrap();
    assert_eq!(rf.to_json(true), again.to_json(true));
}

#[test]
fn random_scores_have_chance_auc() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let labels: Vec<usize> = (0..400).map(|i| i % 2).collect();
    let scores: Vec<f64> = (0..400).map(|_| rng.random()).collect();
    let a = auc(&roc_curve(&scores, &labels, 1).unwrap());
    assert!((0.40..=0.60).contains(&a), "{a}");
}

#[test]
fn reports_carry_per_class_metrics_and_features() {
    let ds = lesion_data();
    let cfg = PipelineConfig {
        mode: Mode::SmoteGaRf,
        cv_folds: 5,
        ga: GaConfig {
            population_size: 10,
            generations: 3,
            ..GaConfig::default()
        },
        ..PipelineConfig::default()
    };
    let report = run_pipeline(&ds, &cfg).unwrap();
    let names: Vec<&str> = report.per_class.iter().map(|c| c.class.as_str()).collect();
    assert_eq!(names, ["SN", "AST"]);
    assert_eq!(report.positive_class, "AST");
    assert!(report.folds.iter().all(|f| f.selected_features.is_some()));
    assert!(!report.selected_feature_frequency.is_empty());

    let plain = run_pipeline(
        &ds,
        &PipelineConfig {
            mode: Mode::RfOnly,
            ..cfg.clone()
        },
    )
    .unwrap();
    assert!(plain.folds.iter().all(|f| f.selected_features.is_none()));
    let sens = |name| plain.class_metrics(name).unwrap().sensitivity;
    assert!(sens("AST") < sens("SN"));
}
