//! Seeded synthetic tabular data.
//!
//! Continuous features are class-conditional Gaussians (clipped to the
//! declared range when there is one); binary and categorical features are
//! class-conditional multinomials over integer codes. Each feature block
//! declares whether it carries signal, is pure noise, is constant, or is
//! entirely missing.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureKind, FeatureSpec, Schema};
use crate::error::{Error, Result};
use crate::rng::substream;

/// What a feature block's values depend on.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    /// Class-conditional shift. For continuous features `separation` is the
    /// distance between adjacent class means in standard deviations; for
    /// coded features it is the logit slope across codes.
    Informative { separation: f64 },
    /// Same distribution for every class.
    #[default]
    Noise,
    /// Every row holds `value`.
    Constant { value: f64 },
    /// Every cell is missing.
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBlock {
    /// Explicit feature names. When empty, `count` names are generated as
    /// `{prefix}{1..=count}`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(flatten)]
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<(f64, f64)>,
    /// Smallest category code (codes run `first_code..first_code + cardinality`).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub first_code: i64,
    /// Round continuous values to this many decimals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decimals: Option<u32>,
    #[serde(default)]
    pub signal: Signal,
}

fn is_zero(v: &i64) -> bool {
    *v == 0
}

impl FeatureBlock {
    pub fn named(names: &[&str], kind: FeatureKind, signal: Signal) -> Self {
        FeatureBlock {
            names: names.iter().map(|s| s.to_string()).collect(),
            prefix: None,
            count: None,
            kind,
            range: None,
            first_code: 0,
            decimals: None,
            signal,
        }
    }

    pub fn counted(prefix: &str, count: usize, kind: FeatureKind, signal: Signal) -> Self {
        FeatureBlock {
            names: Vec::new(),
            prefix: Some(prefix.to_string()),
            count: Some(count),
            kind,
            range: None,
            first_code: 0,
            decimals: None,
            signal,
        }
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }

    pub fn with_first_code(mut self, code: i64) -> Self {
        self.first_code = code;
        self
    }

    pub fn with_decimals(mut self, decimals: u32) -> Self {
        self.decimals = Some(decimals);
        self
    }

    fn feature_names(&self) -> Vec<String> {
        if !self.names.is_empty() {
            return self.names.clone();
        }
        let prefix = self.prefix.as_deref().unwrap_or("x");
        (1..=self.count.unwrap_or(0))
            .map(|i| format!("{prefix}{i}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    #[serde(default = "default_class_names")]
    pub class_names: Vec<String>,
    /// Rows per class, in class order.
    pub class_counts: Vec<i64>,
    pub blocks: Vec<FeatureBlock>,
    /// Probability that any cell of a noise or informative feature is blanked.
    #[serde(default)]
    pub missing_rate: f64,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_class_names() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

fn default_label_column() -> String {
    "label".into()
}

impl GeneratorConfig {
    /// Two classes with `informative` signal-bearing continuous features
    /// (`inf1..`) followed by `noise` pure-noise ones (`noise1..`).
    pub fn gaussian(counts: [i64; 2], informative: usize, noise: usize, separation: f64) -> Self {
        let mut blocks = Vec::new();
        if informative > 0 {
            blocks.push(FeatureBlock::counted(
                "inf",
                informative,
                FeatureKind::Continuous,
                Signal::Informative { separation },
            ));
        }
        if noise > 0 {
            blocks.push(FeatureBlock::counted(
                "noise",
                noise,
                FeatureKind::Continuous,
                Signal::Noise,
            ));
        }
        GeneratorConfig {
            class_names: default_class_names(),
            class_counts: counts.to_vec(),
            blocks,
            missing_rate: 0.0,
            label_column: default_label_column(),
            seed: None,
        }
    }

    /// A dataset laid out like the 29-attribute clinical, histological and
    /// immunohistochemical lesion table: 47 benign (`SN`) and 7 atypical
    /// (`AST`) rows, one constant attribute (P16) and one attribute that is
    /// never observed (ALK Fish), leaving 27 usable features.
    pub fn paper_shaped() -> Self {
        use FeatureKind::*;
        let inf = |separation| Signal::Informative { separation };
        let bin = |name: &str, signal| FeatureBlock::named(&[name], Binary, signal);
        let cont = |name: &str, lo, hi, decimals, signal| {
            FeatureBlock::named(&[name], Continuous, signal)
                .with_range(lo, hi)
                .with_decimals(decimals)
        };
        let cat = |name: &str, cardinality, first, signal| {
            FeatureBlock::named(&[name], Categorical { cardinality }, signal).with_first_code(first)
        };
        let blocks = vec![
            bin("Gender", inf(0.25)),
            cat("Localization", 5, 1, Signal::Noise),
            cont("Age", 2.0, 54.0, 0, inf(0.8)),
            cat("Format", 3, 1, Signal::Noise),
            cont("Size of spitz", 0.3, 1.4, 1, inf(0.8)),
            cont("Thickness", 0.1, 6.0, 1, inf(1.0)),
            cont("Mitotic index", 0.0, 2.2, 1, inf(1.0)),
            bin("Cytonuclear atypia", inf(0.65)),
            bin("Deep mitosis", inf(0.5)),
            bin("Atypical mitosis", inf(0.4)),
            bin("Infiltration of the hypodermis", inf(0.5)),
            bin("Asymmetry", inf(0.5)),
            bin("Blurred boundaries", Signal::Noise),
            bin("Pagetoid spread", inf(0.4)),
            bin("Density of lymphocytic infiltrate", Signal::Noise),
            bin("Hypercellularity", inf(0.5)),
            bin("Ulceration", Signal::Noise),
            bin("Kamino's body", Signal::Noise),
            bin("Desmoplastic cells", Signal::Noise),
            bin("Epidermal alteration", inf(0.3)),
            bin("Grenz zone infiltration", Signal::Noise),
            bin("Irregular nests", Signal::Noise),
            bin("Lack of maturation", inf(0.65)),
            bin("P16", Signal::Constant { value: 0.0 }),
            cont("KI 67", 0.0, 18.0, 0, inf(1.0)),
            bin("BRAF", Signal::Noise),
            bin("ALK IH", inf(0.3)),
            bin("ALK Fish", Signal::Missing),
            cat("Melanin pigmentation", 4, 0, Signal::Noise),
        ];
        GeneratorConfig {
            class_names: vec!["SN".into(), "AST".into()],
            class_counts: vec![47, 7],
            blocks,
            missing_rate: 0.03,
            label_column: "diagnosis".into(),
            seed: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: GeneratorConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn schema(&self) -> Result<Schema> {
        let features = self
            .blocks
            .iter()
            .flat_map(|b| {
                b.feature_names().into_iter().map(|name| FeatureSpec {
                    name,
                    kind: b.kind,
                    range: b.range,
                })
            })
            .collect();
        Schema::new(self.label_column.clone(), features)
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_counts.is_empty() {
            return Err(Error::Config("no classes".into()));
        }
        if self.class_counts.len() != self.class_names.len() {
            return Err(Error::Config(format!(
                "{} class counts for {} class names",
                self.class_counts.len(),
                self.class_names.len()
            )));
        }
        if let Some(n) = self.class_counts.iter().find(|&&n| n < 0) {
            return Err(Error::Config(format!("negative class count {n}")));
        }
        if self.class_counts.iter().sum::<i64>() == 0 {
            return Err(Error::Config("configuration generates no rows".into()));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(Error::Config(format!(
                "missing_rate {} outside [0, 1)",
                self.missing_rate
            )));
        }
        for b in &self.blocks {
            if let Signal::Informative { separation } = b.signal {
                if !separation.is_finite() {
                    return Err(Error::Config("non-finite separation".into()));
                }
            }
        }
        self.schema().map(|_| ())
    }
}

/// Generates a dataset from `cfg`. Rows come grouped by class in class
/// order. Identical `(cfg, seed)` pairs give bit-identical datasets.
pub fn generate_synthetic(cfg: &GeneratorConfig, seed: u64) -> Result<Dataset> {
    cfg.validate()?;
    let schema = cfg.schema()?;
    let y: Vec<usize> = cfg
        .class_counts
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| std::iter::repeat_n(c, n as usize))
        .collect();
    let n_rows = y.len();
    let n_classes = cfg.class_counts.len();
    let n_features = schema.features.len();

    let mut x = vec![0.0; n_rows * n_features];
    let mut values = substream(seed, 0);
    let mut blanks = substream(seed, 1);
    let mut j = 0;
    for block in &cfg.blocks {
        for _ in block.feature_names() {
            for (i, &c) in y.iter().enumerate() {
                let shift = class_shift(c, n_classes);
                let v = sample_value(block, c, shift, &mut values);
                x[i * n_features + j] = v;
            }
            if matches!(block.signal, Signal::Noise | Signal::Informative { .. })
                && cfg.missing_rate > 0.0
            {
                for i in 0..n_rows {
                    if blanks.random::<f64>() < cfg.missing_rate {
                        x[i * n_features + j] = f64::NAN;
                    }
                }
            }
            j += 1;
        }
    }
    Dataset::from_flat(x, y, schema.features, cfg.class_names.clone())
}

/// Position of class `c` on `[-1, 1]`, used by coded features.
fn class_shift(c: usize, n_classes: usize) -> f64 {
    if n_classes < 2 {
        0.0
    } else {
        2.0 * c as f64 / (n_classes - 1) as f64 - 1.0
    }
}

fn sample_value<R: Rng>(block: &FeatureBlock, class: usize, shift: f64, rng: &mut R) -> f64 {
    let separation = match block.signal {
        Signal::Constant { value } => return value,
        Signal::Missing => return f64::NAN,
        Signal::Noise => 0.0,
        Signal::Informative { separation } => separation,
    };
    match block.kind {
        FeatureKind::Continuous => {
            let v = match block.range {
                None => {
                    let normal = Normal::new(class as f64 * separation, 1.0).expect("sd > 0");
                    normal.sample(rng)
                }
                Some((lo, hi)) => {
                    let sd = (hi - lo) / 6.0;
                    let mean = lo + 0.35 * (hi - lo) + class as f64 * separation * sd;
                    let normal = Normal::new(mean, sd).expect("sd > 0");
                    normal.sample(rng).clamp(lo, hi)
                }
            };
            match block.decimals {
                Some(d) => {
                    let scale = 10f64.powi(d as i32);
                    (v * scale).round() / scale
                }
                None => v,
            }
        }
        kind => {
            let m = kind.cardinality().expect("coded feature") as usize;
            let weights: Vec<f64> = (0..m)
                .map(|v| {
                    let pos = 2.0 * v as f64 / (m - 1) as f64 - 1.0;
                    (separation * shift * pos).exp()
                })
                .collect();
            let total: f64 = weights.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut code = m - 1;
            for (v, w) in weights.iter().enumerate() {
                if u < *w {
                    code = v;
                    break;
                }
                u -= w;
            }
            (block.first_code + code as i64) as f64
        }
    }
}
