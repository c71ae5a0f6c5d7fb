//! Cross-validation, metrics, ROC analysis and the end-to-end pipeline.

mod folds;
mod metrics;
mod pipeline;
mod roc;

pub use folds::{stratified_folds, stratified_folds_for_labels, Folds};
pub use metrics::{class_metrics, confusion, ClassMetrics, ConfusionMatrix, Metrics};
pub use pipeline::{
    run_pipeline, write_comparison_csv, EvalReport, FeatureFrequency, FoldReport, Mode,
    NamedClassMetrics, PipelineConfig, SmoteScope, GLOBAL_SCOPE_WARNING,
};
pub use roc::{auc, roc_curve, write_roc_csv, RocCurve, RocPoint};
