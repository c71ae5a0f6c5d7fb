//! Command-line front end. Each subcommand runs one stage of the workflow
//! and writes its files plus a `manifest.json` into the `--out` directory.
//!
//! Outputs are assembled in memory and written only after the command has
//! succeeded. Exit status is 0 on success, 1 when the computation fails and
//! 2 for usage or input errors.

mod commands;
mod config;
mod manifest;
mod model;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};

pub use config::{RunConfig, ScopeChoice};
pub use manifest::{sha256_hex, FileDigest, RunManifest};
pub use model::{ModelBundle, MODEL_VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "smote-ga-rf",
    version,
    about = "SMOTE, GA feature selection and random forests for small imbalanced tables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset and its schema.
    Synth(SynthArgs),
    /// Drop degenerate columns, impute and min-max scale a dataset.
    Preprocess(PreprocessArgs),
    /// Preprocess a dataset and balance it with SMOTE.
    Smote(SmoteArgs),
    /// Preprocess, balance with SMOTE and run GA feature selection.
    Select(SelectArgs),
    /// Fit a model on a whole dataset and save it.
    Train(TrainArgs),
    /// Score a dataset with a saved model.
    Predict(PredictArgs),
    /// Cross-validate one or more configurations and compare them.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Directory that receives the outputs; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Data CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Schema JSON describing the feature columns and the label column.
    #[arg(long)]
    pub schema: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator config JSON; the lesion-shaped default when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub output: Output,
}

/// Overrides shared by the commands that read a run config.
#[derive(Debug, Args)]
pub struct Overrides {
    /// Run config JSON; every field is optional.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// SMOTE neighbor count.
    #[arg(long = "smote-k")]
    pub smote_k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SmoteArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub overrides: Overrides,
    /// rf_only, smote_rf or smote_ga_rf (default).
    #[arg(long)]
    pub mode: Option<String>,
    /// JSON array of feature names to train on, as written by `select`.
    /// Skips the GA in smote_ga_rf mode.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model JSON written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Optional; must describe the same features as the model's schema.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Comma-separated modes: rf_only, smote_rf, smote_ga_rf.
    #[arg(long)]
    pub mode: Option<String>,
    /// Cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// per_fold, global or both.
    #[arg(long = "smote-scope")]
    pub smote_scope: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

impl Command {
    fn output(&self) -> &Output {
        match self {
            Command::Synth(a) => &a.output,
            Command::Preprocess(a) => &a.output,
            Command::Smote(a) => &a.output,
            Command::Select(a) => &a.output,
            Command::Train(a) => &a.output,
            Command::Predict(a) => &a.output,
            Command::Pipeline(a) => &a.output,
        }
    }
}

/// Entry point for the binary: parses `std::env::args` and returns the exit
/// status.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(written) => {
            for path in written {
                eprintln!("wrote {}", path.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    }
}

/// Runs one subcommand and returns the paths it wrote.
pub fn execute(command: Command) -> Result<Vec<PathBuf>> {
    match command.output().threads {
        None => commands::dispatch(command),
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?
            .install(|| commands::dispatch(command)),
    }
}
