use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::manifest::{sha256_hex, unix_seconds, FileDigest, Outputs, RunManifest};
use super::model::ModelBundle;
use super::{
    Command, Output, Overrides, PipelineArgs, PredictArgs, PreprocessArgs, SelectArgs, SmoteArgs,
    SynthArgs, TrainArgs,
};
use crate::dataset::{
    generate_synthetic, read_csv, read_unlabeled_csv, write_csv_to, Dataset, FeatureSpec,
    GeneratorConfig, Preprocessor, Schema,
};
use crate::error::{Error, Result};
use crate::eval::{
    run_pipeline, write_comparison_csv, write_roc_csv, EvalReport, Mode, SmoteScope,
};
use crate::forest::{self, ForestConfig};
use crate::gafs::{run_ga, write_history_csv, FitnessSpec, GaConfig, GenerationStats};
use crate::rng::derive_seed;
use crate::smote::{self, write_provenance_csv, SmoteConfig};

const SMOTE_TAG: u64 = 3;
const GA_TAG: u64 = 4;
const FITNESS_TAG: u64 = 5;
const FOREST_TAG: u64 = 6;

/// State shared by every command while it runs.
struct Run {
    command: &'static str,
    started: u64,
    inputs: Vec<FileDigest>,
    outputs: Outputs,
}

impl Run {
    fn new(command: &'static str) -> Self {
        Run {
            command,
            started: unix_seconds(),
            inputs: Vec::new(),
            outputs: Outputs::default(),
        }
    }

    fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    fn read_text(&mut self, path: &Path) -> Result<String> {
        String::from_utf8(self.read(path)?)
            .map_err(|_| Error::Config(format!("{} is not UTF-8", path.display())))
    }

    fn load(&mut self, data: &Path, schema: &Path) -> Result<(Schema, Dataset)> {
        let schema = Schema::from_json(&self.read_text(schema)?)?;
        let ds = read_csv(&self.read(data)?[..], &schema)?;
        Ok((schema, ds))
    }

    fn load_config(&mut self, overrides: &Overrides) -> Result<RunConfig> {
        let mut cfg = match &overrides.config {
            Some(path) => RunConfig::from_json(&self.read_text(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(k) = overrides.smote_k {
            cfg.smote.k_neighbors = k;
        }
        Ok(cfg)
    }

    fn json(&mut self, name: &str, value: &impl serde::Serialize) {
        let text = serde_json::to_string_pretty(value).expect("outputs serialize");
        self.outputs.add(name, text + "\n");
    }

    fn csv_dataset(&mut self, name: &str, ds: &Dataset, label_column: &str) -> Result<()> {
        let mut buf = Vec::new();
        write_csv_to(ds, &mut buf, label_column)?;
        self.outputs.add(name, buf);
        Ok(())
    }

    fn finish(
        self,
        output: &Output,
        seed: Option<u64>,
        config: serde_json::Value,
    ) -> Result<Vec<PathBuf>> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.into(),
            arguments: std::env::args().skip(1).collect(),
            seed,
            threads: output.threads,
            config,
            inputs: self.inputs,
            outputs: Vec::new(),
            started_unix: self.started,
            finished_unix: 0,
        };
        self.outputs.commit(&output.out, manifest)
    }
}

fn to_value(v: &impl serde::Serialize) -> serde_json::Value {
    serde_json::to_value(v).expect("configs serialize")
}

pub(super) fn dispatch(command: Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Synth(a) => synth(&a),
        Command::Preprocess(a) => preprocess(&a),
        Command::Smote(a) => smote_cmd(&a),
        Command::Select(a) => select(&a),
        Command::Train(a) => train(&a),
        Command::Predict(a) => predict(&a),
        Command::Pipeline(a) => pipeline(&a),
    }
}

fn synth(args: &SynthArgs) -> Result<Vec<PathBuf>> {
    let mut run = Run::new("synth");
    let mut cfg = match &args.config {
        Some(path) => GeneratorConfig::from_json(&run.read_text(path)?)?,
        None => GeneratorConfig::paper_shaped(),
    };
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    cfg.seed = Some(seed);
    let ds = generate_synthetic(&cfg, seed)?;
    let schema = cfg.schema()?;
    run.csv_dataset("data.csv", &ds, &schema.label_column)?;
    run.outputs.add("schema.json", schema.to_json() + "\n");
    run.finish(&args.output, Some(seed), to_value(&cfg))
}

/// The preprocessed matrix with every feature declared continuous, since
/// scaled codes are no longer integers.
fn as_continuous(ds: &Dataset) -> Result<Dataset> {
    let specs = ds
        .feature_names()
        .into_iter()
        .map(FeatureSpec::continuous)
        .collect();
    Dataset::from_flat(
        ds.values().to_vec(),
        ds.labels().to_vec(),
        specs,
        ds.class_names().to_vec(),
    )
}

fn fit_preprocessing(ds: &Dataset) -> Result<(Preprocessor, Dataset)> {
    let pre = Preprocessor::fit(ds)?;
    let out = as_continuous(&pre.transform(ds)?)?;
    if !pre.dropped.is_empty() {
        eprintln!("dropped degenerate columns: {}", pre.dropped.join(", "));
    }
    Ok((pre, out))
}

fn preprocess(args: &PreprocessArgs) -> Result<Vec<PathBuf>> {
    let mut run = Run::new("preprocess");
    let (schema, ds) = run.load(&args.input.data, &args.input.schema)?;
    let (pre, out) = fit_preprocessing(&ds)?;
    run.csv_dataset("data.csv", &out, &schema.label_column)?;
    run.outputs.add(
        "schema.json",
        out.schema(&schema.label_column).to_json() + "\n",
    );
    run.json("preprocessor.json", &pre);
    run.finish(&args.output, None, serde_json::Value::Null)
}

fn balance(ds: &Dataset, cfg: &SmoteConfig) -> Result<smote::SmoteOutput> {
    let out = smote::oversample(ds, cfg)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    Ok(out)
}

fn smote_cmd(args: &SmoteArgs) -> Result<Vec<PathBuf>> {
    let mut run = Run::new("smote");
    let cfg = run.load_config(&args.overrides)?;
    let smote_cfg = SmoteConfig {
        seed: cfg.seed,
        ..cfg.smote.clone()
    };
    smote_cfg.validate()?;
    let (schema, ds) = run.load(&args.input.data, &args.input.schema)?;
    let (pre, prepared) = fit_preprocessing(&ds)?;
    let out = balance(&prepared, &smote_cfg)?;
    run.csv_dataset("data.csv", &out.dataset, &schema.label_column)?;
    run.outputs.add(
        "schema.json",
        out.dataset.schema(&schema.label_column).to_json() + "\n",
    );
    let mut prov = Vec::new();
    write_provenance_csv(&out.provenance, &mut prov)?;
    run.outputs.add("provenance.csv", prov);
    run.json("preprocessor.json", &pre);
    run.finish(&args.output, Some(cfg.seed), to_value(&smote_cfg))
}

fn ga_settings(cfg: &RunConfig) -> (GaConfig, FitnessSpec) {
    (
        GaConfig {
            seed: derive_seed(cfg.seed, GA_TAG),
            ..cfg.ga.clone()
        },
        FitnessSpec {
            fitness_seed: derive_seed(cfg.seed, FITNESS_TAG),
            ..cfg.fitness.clone()
        },
    )
}

fn write_history(run: &mut Run, name: &str, history: &[GenerationStats]) -> Result<()> {
    let mut buf = Vec::new();
    write_history_csv(history, &mut buf)?;
    run.outputs.add(name, buf);
    Ok(())
}

fn select(args: &SelectArgs) -> Result<Vec<PathBuf>> {
    let mut run = Run::new("select");
    let cfg = run.load_config(&args.overrides)?;
    cfg.pipeline(Mode::SmoteGaRf, SmoteScope::PerFold)
        .validate()?;
    let (_, ds) = run.load(&args.input.data, &args.input.schema)?;
    let (_, prepared) = fit_preprocessing(&ds)?;
    let smote_cfg = SmoteConfig {
        seed: derive_seed(cfg.seed, SMOTE_TAG),
        ..cfg.smote.clone()
    };
    let balanced = balance(&prepared, &smote_cfg)?.dataset;
    let (ga, spec) = ga_settings(&cfg);
    let result = run_ga(&balanced, &ga, &spec)?;
    let names = result.best_mask.selected_names(&balanced.feature_names());
    eprintln!(
        "selected {} of {} features, fitness {:.4}",
        names.len(),
        balanced.n_features(),
        result.best_fitness
    );
    run.json("selected_features.json", &names);
    write_history(&mut run, "ga_history.csv", &result.history)?;
    run.json(
        "selection.json",
        &serde_json::json!({
            "selected_features": names,
            "mask": result.best_mask.to_string(),
            "candidate_features": balanced.feature_names(),
            "best_fitness": result.best_fitness,
            "distinct_masks_evaluated": result.evaluations,
        }),
    );
    run.finish(&args.output, Some(cfg.seed), to_value(&cfg))
}

fn train(args: &TrainArgs) -> Result<Vec<PathBuf>> {
    let mut run = Run::new("train");
    let cfg = run.load_config(&args.overrides)?;
    let mode: Mode = match &args.mode {
        Some(m) => m.parse()?,
        None => Mode::SmoteGaRf,
    };
    cfg.pipeline(mode, SmoteScope::PerFold).validate()?;
    let requested: Option<Vec<String>> = match &args.features {
        Some(path) => Some(serde_json::from_str(&run.read_text(path)?)?),
        None => None,
    };
    let (schema, ds) = run.load(&args.input.data, &args.input.schema)?;
    let (pre, prepared) = fit_preprocessing(&ds)?;
    let positive = match &cfg.positive_class {
        Some(name) => name.clone(),
        None => {
            let c = smote::minority_class(&prepared)
                .ok_or_else(|| Error::Data("dataset is empty".into()))?;
            prepared.class_names()[c].clone()
        }
    };
    let mut train = prepared;
    if mode.uses_smote() {
        let smote_cfg = SmoteConfig {
            seed: derive_seed(cfg.seed, SMOTE_TAG),
            ..cfg.smote.clone()
        };
        train = balance(&train, &smote_cfg)?.dataset;
    }
    let names = train.feature_names();
    let columns: Vec<usize> = match requested {
        Some(wanted) => wanted
            .iter()
            .map(|w| {
                names.iter().position(|n| n == w).ok_or_else(|| {
                    Error::Config(format!("feature `{w}` is not a usable column of the data"))
                })
            })
            .collect::<Result<_>>()?,
        None if mode == Mode::SmoteGaRf => {
            let (ga, spec) = ga_settings(&cfg);
            let result = run_ga(&train, &ga, &spec)?;
            write_history(&mut run, "ga_history.csv", &result.history)?;
            result.best_mask.selected_indices()
        }
        None => (0..names.len()).collect(),
    };
    if columns.is_empty() {
        return Err(Error::Config("no features selected".into()));
    }
    let train = train.select_columns(&columns);
    let forest_cfg = ForestConfig {
        seed: derive_seed(cfg.seed, FOREST_TAG),
        ..cfg.forest.clone()
    };
    let rf = forest::fit(&train, &forest_cfg)?;
    let selected = train.feature_names();
    if forest_cfg.bootstrap {
        let oob = forest::oob_error(&rf, &train)?;
        eprintln!(
            "out-of-bag error {:.4} over {} of {} training rows",
            oob.error, oob.covered, oob.n_rows
        );
    }
    let bundle = ModelBundle::new(schema, pre, selected.clone(), positive, &rf);
    run.outputs.add("model.json", bundle.to_json());
    run.json("selected_features.json", &selected);
    run.finish(
        &args.output,
        Some(cfg.seed),
        to_value(&serde_json::json!({
            "mode": mode,
            "config": cfg,
        })),
    )
}

fn predict(args: &PredictArgs) -> Result<Vec<PathBuf>> {
    let mut run = Run::new("predict");
    let (bundle, rf) = ModelBundle::from_json(&run.read_text(&args.model)?)?;
    if let Some(path) = &args.schema {
        let given = Schema::from_json(&run.read_text(path)?)?;
        if given.features != bundle.schema.features {
            return Err(Error::Schema(
                "the given schema does not match the model's schema".into(),
            ));
        }
    }
    let (ds, actual) = read_unlabeled_csv(&run.read(&args.data)?[..], &bundle.schema)?;
    let prepared = bundle.preprocessor.transform(&ds)?;
    let test = prepared.select_columns(&bundle.selected_columns()?);
    let (preds, proba) = rf.predict_dataset(&test)?;
    let positive = rf
        .class_names
        .iter()
        .position(|c| *c == bundle.positive_class)
        .expect("checked when the model was loaded");

    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["row", "predicted", "score"];
    if actual.is_some() {
        header.push("actual");
    }
    wtr.write_record(&header)?;
    let mut correct = 0;
    for (i, (&p, probs)) in preds.iter().zip(&proba).enumerate() {
        let mut rec = vec![
            i.to_string(),
            rf.class_names[p].clone(),
            format!("{}", probs[positive]),
        ];
        if let Some(actual) = &actual {
            correct += usize::from(actual[i] == rf.class_names[p]);
            rec.push(actual[i].clone());
        }
        wtr.write_record(&rec)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::io("<predictions>", e.into_error()))?;
    run.outputs.add("predictions.csv", bytes);
    if actual.is_some() && !preds.is_empty() {
        eprintln!(
            "accuracy {:.4} on {} rows",
            correct as f64 / preds.len() as f64,
            preds.len()
        );
    }
    run.finish(&args.output, None, serde_json::Value::Null)
}

fn pipeline(args: &PipelineArgs) -> Result<Vec<PathBuf>> {
    let mut run = Run::new("pipeline");
    let mut cfg = run.load_config(&args.overrides)?;
    if let Some(modes) = &args.mode {
        cfg.modes = modes
            .split(',')
            .map(|m| m.trim().parse())
            .collect::<Result<_>>()?;
    }
    if let Some(k) = args.folds {
        cfg.cv_folds = k;
    }
    if let Some(scope) = &args.smote_scope {
        cfg.smote_scope = scope.parse()?;
    }
    cfg.validate()?;
    let (_, ds) = run.load(&args.input.data, &args.input.schema)?;

    let mut reports: Vec<EvalReport> = Vec::new();
    for &mode in &cfg.modes {
        for scope in cfg.smote_scope.scopes() {
            // without SMOTE the scope changes nothing
            if !mode.uses_smote() && scope == SmoteScope::Global {
                continue;
            }
            let report = run_pipeline(&ds, &cfg.pipeline(mode, scope))?;
            let pos = report.positive_metrics();
            eprintln!(
                "{} ({}): accuracy {:.4}, sensitivity[{}] {:.4}, AUC {:.4}",
                mode.as_str(),
                scope.as_str(),
                report.accuracy,
                report.positive_class,
                pos.sensitivity,
                report.auc
            );
            reports.push(report);
        }
    }
    for r in &reports {
        let tag = format!("{}_{}", r.mode.as_str(), r.smote_scope.as_str());
        run.outputs
            .add(format!("report_{tag}.json"), r.to_json() + "\n");
        let mut roc = Vec::new();
        write_roc_csv(&r.roc, &mut roc)?;
        run.outputs.add(format!("roc_{tag}.csv"), roc);
        if r.mode == Mode::SmoteGaRf {
            run.json(
                &format!("selected_features_{}.json", r.smote_scope.as_str()),
                &serde_json::json!({
                    "consensus_features": r.consensus_features,
                    "frequency": r.selected_feature_frequency,
                    "per_fold": r.folds.iter().map(|f| &f.selected_features).collect::<Vec<_>>(),
                }),
            );
            for f in &r.folds {
                if let Some(history) = &f.ga_history {
                    let name = format!("ga_history_{}_fold{}.csv", r.smote_scope.as_str(), f.fold);
                    write_history(&mut run, &name, history)?;
                }
            }
        }
    }
    let mut table = Vec::new();
    write_comparison_csv(&reports, &mut table)?;
    run.outputs.add("comparison.csv", table);
    run.finish(&args.output, Some(cfg.seed), to_value(&cfg))
}
