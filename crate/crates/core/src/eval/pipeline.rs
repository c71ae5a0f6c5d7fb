//! Cross-validated runs of the three model configurations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    auc, class_metrics, confusion, roc_curve, stratified_folds, ConfusionMatrix, RocCurve,
};
use crate::dataset::{Dataset, Preprocessor};
use crate::error::{Error, Result};
use crate::forest::{self, ForestConfig};
use crate::gafs::{run_ga, FitnessSpec, GaConfig, GenerationStats};
use crate::rng::derive_seed;
use crate::smote::{self, SmoteConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Forest on the raw class balance.
    RfOnly,
    /// SMOTE then forest.
    SmoteRf,
    /// SMOTE, GA feature selection, then forest.
    SmoteGaRf,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::RfOnly, Mode::SmoteRf, Mode::SmoteGaRf];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::RfOnly => "rf_only",
            Mode::SmoteRf => "smote_rf",
            Mode::SmoteGaRf => "smote_ga_rf",
        }
    }

    pub fn uses_smote(self) -> bool {
        self != Mode::RfOnly
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoteScope {
    /// SMOTE runs on each training partition only.
    PerFold,
    /// SMOTE runs once on the whole dataset before the folds are drawn, so
    /// synthetic rows interpolated from test rows reach training and vice
    /// versa. Scores are optimistic.
    Global,
}

impl SmoteScope {
    pub fn as_str(self) -> &'static str {
        match self {
            SmoteScope::PerFold => "per_fold",
            SmoteScope::Global => "global",
        }
    }
}

impl std::str::FromStr for SmoteScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_fold" => Ok(SmoteScope::PerFold),
            "global" => Ok(SmoteScope::Global),
            other => Err(Error::Config(format!("unknown SMOTE scope `{other}`"))),
        }
    }
}

pub const GLOBAL_SCOPE_WARNING: &str = "smote_scope=global: SMOTE ran on the full dataset before \
cross-validation, so synthetic rows built from test rows were used for training. \
Scores are optimistically biased.";

/// The `seed` fields of the nested configs are ignored; every seed is
/// derived from the master `seed` and the fold index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub smote_scope: SmoteScope,
    pub cv_folds: usize,
    pub smote: SmoteConfig,
    pub ga: GaConfig,
    pub fitness: FitnessSpec,
    pub forest: ForestConfig,
    /// Class scored by the ROC curve; the minority class when unset.
    pub positive_class: Option<String>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::SmoteGaRf,
            smote_scope: SmoteScope::PerFold,
            cv_folds: 10,
            smote: SmoteConfig::default(),
            ga: GaConfig::default(),
            fitness: FitnessSpec::default(),
            forest: ForestConfig::default(),
            positive_class: None,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cv_folds < 2 {
            return Err(Error::Config(format!(
                "cv_folds must be >= 2, got {}",
                self.cv_folds
            )));
        }
        self.forest.validate()?;
        if self.mode.uses_smote() {
            self.smote.validate()?;
        }
        if self.mode == Mode::SmoteGaRf {
            self.ga.validate()?;
            self.fitness.rf_config.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedClassMetrics {
    pub class: String,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Synthetic rows added to the training partition.
    pub synthetic_train_rows: usize,
    /// Synthetic rows that landed in the test partition. Always zero in
    /// per-fold scope.
    pub synthetic_test_rows: usize,
    pub test_class_counts: Vec<usize>,
    /// Classes with no test rows in this fold.
    pub missing_test_classes: Vec<String>,
    pub dropped_features: Vec<String>,
    pub selected_features: Option<Vec<String>>,
    pub ga_best_fitness: Option<f64>,
    pub ga_history: Option<Vec<GenerationStats>>,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrequency {
    pub feature: String,
    pub folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: Mode,
    pub smote_scope: SmoteScope,
    pub seed: u64,
    /// Rows evaluated; includes synthetic rows in global scope.
    pub n_rows: usize,
    pub class_names: Vec<String>,
    pub positive_class: String,
    pub accuracy: f64,
    pub per_class: Vec<NamedClassMetrics>,
    pub g_mean: f64,
    pub auc: f64,
    pub confusion: ConfusionMatrix,
    pub roc: RocCurve,
    pub folds: Vec<FoldReport>,
    /// How many folds selected each feature, most frequent first.
    pub selected_feature_frequency: Vec<FeatureFrequency>,
    /// Features chosen in more than half of the folds.
    pub consensus_features: Vec<String>,
    pub undefined_metrics: Vec<String>,
    pub warnings: Vec<String>,
    pub config: PipelineConfig,
}

impl EvalReport {
    pub fn class_metrics(&self, name: &str) -> Option<&NamedClassMetrics> {
        self.per_class.iter().find(|m| m.class == name)
    }

    pub fn positive_metrics(&self) -> &NamedClassMetrics {
        self.class_metrics(&self.positive_class)
            .expect("positive class is one of the reported classes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

const FOLDS_TAG: u64 = 1;
const GLOBAL_SMOTE_TAG: u64 = 2;
const SMOTE_TAG: u64 = 3;
const GA_TAG: u64 = 4;
const FITNESS_TAG: u64 = 5;
const FOREST_TAG: u64 = 6;

struct FoldOutcome {
    report: FoldReport,
    rows: Vec<usize>,
    preds: Vec<usize>,
    scores: Vec<f64>,
}

/// Stratified cross-validation of one configuration.
///
/// In each fold, preprocessing is fitted on the training partition and
/// applied to the test partition; SMOTE (per-fold scope) and GA selection run
/// on the training partition only. Predictions from all folds are pooled
/// into one confusion matrix and one ROC curve.
pub fn run_pipeline(ds: &Dataset, cfg: &PipelineConfig) -> Result<EvalReport> {
    cfg.validate()?;
    if ds.n_features() == 0 {
        return Err(Error::Data("dataset has no feature columns".into()));
    }
    if ds.present_classes().len() < 2 {
        return Err(Error::Data(
            "cross-validation needs at least two classes".into(),
        ));
    }
    let positive = match &cfg.positive_class {
        Some(name) => ds
            .class_names()
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Config(format!("unknown positive class `{name}`")))?,
        None => smote::minority_class(ds).expect("classes present"),
    };

    let mut warnings = Vec::new();
    let global = cfg.mode.uses_smote() && cfg.smote_scope == SmoteScope::Global;
    // In global scope the CV runs over the augmented dataset.
    let (data, n_original) = if global {
        warnings.push(GLOBAL_SCOPE_WARNING.to_string());
        let pre = Preprocessor::fit(ds)?;
        let prepared = pre.transform(ds)?;
        let smote_cfg = SmoteConfig {
            seed: derive_seed(cfg.seed, GLOBAL_SMOTE_TAG),
            ..cfg.smote.clone()
        };
        let out = smote::oversample(&prepared, &smote_cfg)?;
        warnings.extend(out.warnings);
        (out.dataset, ds.n_rows())
    } else {
        (ds.clone(), ds.n_rows())
    };

    let folds = stratified_folds(&data, cfg.cv_folds, derive_seed(cfg.seed, FOLDS_TAG))?;
    warnings.extend(folds.warnings.iter().cloned());

    let outcomes: Vec<FoldOutcome> = (0..folds.k())
        .into_par_iter()
        .map(|f| {
            run_fold(
                &data,
                f,
                &folds.train_indices(f),
                &folds.test_sets[f],
                n_original,
                !global,
                positive,
                cfg,
            )
        })
        .collect::<Result<_>>()?;

    let n = data.n_rows();
    let mut preds = vec![0usize; n];
    let mut scores = vec![0f64; n];
    let mut pooled = ConfusionMatrix::zeros(data.n_classes());
    for o in &outcomes {
        pooled.add(&o.report.confusion);
        for (k, &i) in o.rows.iter().enumerate() {
            preds[i] = o.preds[k];
            scores[i] = o.scores[k];
        }
    }
    for o in &outcomes {
        warnings.extend(
            o.report
                .warnings
                .iter()
                .map(|w| format!("fold {}: {w}", o.report.fold)),
        );
    }
    let metrics = class_metrics(&pooled)?;
    let roc = roc_curve(&scores, data.labels(), positive)?;

    let feature_names = ds.feature_names();
    let mut frequency: Vec<FeatureFrequency> = Vec::new();
    if cfg.mode == Mode::SmoteGaRf {
        for name in &feature_names {
            let count = outcomes
                .iter()
                .filter(|o| {
                    o.report
                        .selected_features
                        .as_ref()
                        .is_some_and(|s| s.contains(name))
                })
                .count();
            if count > 0 {
                frequency.push(FeatureFrequency {
                    feature: name.clone(),
                    folds: count,
                });
            }
        }
        // stable: equal counts keep column order
        frequency.sort_by_key(|f| std::cmp::Reverse(f.folds));
    }
    let consensus = frequency
        .iter()
        .filter(|f| 2 * f.folds > folds.k())
        .map(|f| f.feature.clone())
        .collect();

    let class_names = data.class_names().to_vec();
    Ok(EvalReport {
        mode: cfg.mode,
        smote_scope: cfg.smote_scope,
        seed: cfg.seed,
        n_rows: n,
        positive_class: class_names[positive].clone(),
        accuracy: metrics.accuracy,
        per_class: metrics
            .per_class
            .iter()
            .enumerate()
            .map(|(c, m)| NamedClassMetrics {
                class: class_names[c].clone(),
                sensitivity: m.sensitivity,
                specificity: m.specificity,
                precision: m.precision,
                f1: m.f1,
            })
            .collect(),
        class_names,
        g_mean: metrics.g_mean,
        auc: auc(&roc),
        confusion: pooled,
        roc,
        folds: outcomes.into_iter().map(|o| o.report).collect(),
        selected_feature_frequency: frequency,
        consensus_features: consensus,
        undefined_metrics: metrics.undefined,
        warnings,
        config: cfg.clone(),
    })
}

#[allow(clippy::too_many_arguments)]
fn run_fold(
    data: &Dataset,
    fold: usize,
    train_rows: &[usize],
    test_rows: &[usize],
    n_original: usize,
    smote_in_fold: bool,
    positive: usize,
    cfg: &PipelineConfig,
) -> Result<FoldOutcome> {
    let fold_seed = derive_seed(cfg.seed, 100 + fold as u64);
    let mut fold_warnings = Vec::new();
    let raw_train = data.select_rows(train_rows);
    let raw_test = data.select_rows(test_rows);
    let pre = Preprocessor::fit(&raw_train)?;
    let mut train = pre.transform(&raw_train)?;
    let mut test = pre.transform(&raw_test)?;

    let mut synthetic_train_rows = train_rows.iter().filter(|&&i| i >= n_original).count();
    if cfg.mode.uses_smote() && smote_in_fold {
        let smote_cfg = SmoteConfig {
            seed: derive_seed(fold_seed, SMOTE_TAG),
            ..cfg.smote.clone()
        };
        let out = smote::oversample(&train, &smote_cfg)?;
        synthetic_train_rows = out.provenance.len();
        fold_warnings.extend(out.warnings);
        train = out.dataset;
    }

    let (mut selected_features, mut ga_best_fitness, mut ga_history) = (None, None, None);
    if cfg.mode == Mode::SmoteGaRf {
        let ga_cfg = GaConfig {
            seed: derive_seed(fold_seed, GA_TAG),
            ..cfg.ga.clone()
        };
        let spec = FitnessSpec {
            fitness_seed: derive_seed(fold_seed, FITNESS_TAG),
            ..cfg.fitness.clone()
        };
        let result = run_ga(&train, &ga_cfg, &spec)?;
        let cols = result.best_mask.selected_indices();
        selected_features = Some(result.best_mask.selected_names(&train.feature_names()));
        ga_best_fitness = Some(result.best_fitness);
        ga_history = Some(result.history);
        train = train.select_columns(&cols);
        test = test.select_columns(&cols);
    }

    let forest_cfg = ForestConfig {
        seed: derive_seed(fold_seed, FOREST_TAG),
        ..cfg.forest.clone()
    };
    let rf = forest::fit(&train, &forest_cfg)?;
    let (preds, proba) = rf.predict_dataset(&test)?;
    let scores: Vec<f64> = proba.iter().map(|p| p[positive]).collect();
    let cm = confusion(&preds, test.labels(), data.n_classes())?;
    let test_class_counts = test.class_counts();
    let missing_test_classes: Vec<String> = data
        .present_classes()
        .into_iter()
        .filter(|&c| test_class_counts[c] == 0)
        .map(|c| data.class_names()[c].clone())
        .collect();
    Ok(FoldOutcome {
        report: FoldReport {
            fold,
            n_train: train_rows.len(),
            n_test: test_rows.len(),
            synthetic_train_rows,
            synthetic_test_rows: test_rows.iter().filter(|&&i| i >= n_original).count(),
            test_class_counts,
            missing_test_classes,
            dropped_features: pre.dropped.clone(),
            selected_features,
            ga_best_fitness,
            ga_history,
            accuracy: cm.trace() as f64 / cm.total() as f64,
            confusion: cm,
            warnings: fold_warnings,
        },
        rows: test_rows.to_vec(),
        preds,
        scores,
    })
}

/// One row per report with the pooled metrics, per-class columns in class
/// order.
pub fn write_comparison_csv<W: std::io::Write>(reports: &[EvalReport], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let Some(first) = reports.first() else {
        wtr.flush()
            .map_err(|e| Error::io("<comparison output>", e))?;
        return Ok(());
    };
    let mut header = vec!["mode".to_string(), "smote_scope".into(), "accuracy".into()];
    for metric in ["sensitivity", "specificity", "f1"] {
        for class in &first.class_names {
            header.push(format!("{metric}_{class}"));
        }
    }
    header.extend(["g_mean".into(), "auc".into(), "n_rows".into()]);
    wtr.write_record(&header)?;
    for r in reports {
        let mut row = vec![
            r.mode.as_str().to_string(),
            r.smote_scope.as_str().to_string(),
            format!("{}", r.accuracy),
        ];
        for pick in [
            |m: &NamedClassMetrics| m.sensitivity,
            |m: &NamedClassMetrics| m.specificity,
            |m: &NamedClassMetrics| m.f1,
        ] {
            row.extend(r.per_class.iter().map(|m| format!("{}", pick(m))));
        }
        row.extend([
            format!("{}", r.g_mean),
            format!("{}", r.auc),
            r.n_rows.to_string(),
        ]);
        wtr.write_record(&row)?;
    }
    wtr.flush()
        .map_err(|e| Error::io("<comparison output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, GeneratorConfig};

    fn small_cfg(mode: Mode) -> PipelineConfig {
        PipelineConfig {
            mode,
            cv_folds: 3,
            smote: SmoteConfig {
                k_neighbors: 3,
                ..SmoteConfig::default()
            },
            ga: GaConfig {
                population_size: 6,
                generations: 2,
                ..GaConfig::default()
            },
            fitness: FitnessSpec {
                rf_config: ForestConfig {
                    n_trees: 5,
                    ..ForestConfig::default()
                },
                ..FitnessSpec::default()
            },
            forest: ForestConfig {
                n_trees: 15,
                ..ForestConfig::default()
            },
            seed: 9,
            ..PipelineConfig::default()
        }
    }

    fn data() -> Dataset {
        let cfg = GeneratorConfig::gaussian([30, 8], 3, 3, 2.0);
        generate_synthetic(&cfg, 4).unwrap()
    }

    #[test]
    fn every_row_is_tested_once() {
        let ds = data();
        for mode in Mode::ALL {
            let r = run_pipeline(&ds, &small_cfg(mode)).unwrap();
            assert_eq!(r.confusion.total(), ds.n_rows());
            assert_eq!(r.folds.len(), 3);
            assert!(r.folds.iter().all(|f| f.synthetic_test_rows == 0));
            assert_eq!(r.per_class.len(), 2);
            assert_eq!(r.positive_class, ds.class_names()[1]);
            assert!((0.0..=1.0).contains(&r.auc));
            assert_eq!(
                r.selected_feature_frequency.is_empty(),
                mode != Mode::SmoteGaRf
            );
            assert!(r.warnings.iter().all(|w| !w.contains("global")));
        }
    }

    #[test]
    fn global_scope_is_flagged() {
        let ds = data();
        let cfg = PipelineConfig {
            smote_scope: SmoteScope::Global,
            ..small_cfg(Mode::SmoteRf)
        };
        let r = run_pipeline(&ds, &cfg).unwrap();
        assert_eq!(r.warnings[0], GLOBAL_SCOPE_WARNING);
        assert_eq!(r.n_rows, 60);
        assert!(r.folds.iter().map(|f| f.synthetic_test_rows).sum::<usize>() == 22);
    }

    #[test]
    fn repeat_runs_match() {
        let ds = data();
        let cfg = small_cfg(Mode::SmoteGaRf);
        assert_eq!(
            run_pipeline(&ds, &cfg).unwrap().to_json(),
            run_pipeline(&ds, &cfg).unwrap().to_json()
        );
    }

    #[test]
    fn comparison_table_layout() {
        let ds = data();
        let reports: Vec<EvalReport> = [Mode::RfOnly, Mode::SmoteRf]
            .iter()
            .map(|&m| run_pipeline(&ds, &small_cfg(m)).unwrap())
            .collect();
        let mut buf = Vec::new();
        write_comparison_csv(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("mode,smote_scope,accuracy,sensitivity_"));
        assert!(lines[0].ends_with("g_mean,auc,n_rows"));
        assert!(lines[1].starts_with("rf_only,per_fold,"));
    }

    #[test]
    fn bad_configs() {
        let ds = data();
        let cfg = PipelineConfig {
            cv_folds: 1,
            ..small_cfg(Mode::RfOnly)
        };
        assert!(matches!(run_pipeline(&ds, &cfg), Err(Error::Config(_))));
        let cfg = PipelineConfig {
            positive_class: Some("nope".into()),
            ..small_cfg(Mode::RfOnly)
        };
        assert!(run_pipeline(&ds, &cfg).is_err());
        assert!("smote_ga_rf".parse::<Mode>().is_ok());
        assert!("bogus".parse::<Mode>().is_err());
    }
}
