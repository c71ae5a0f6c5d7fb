use serde::{Deserialize, Serialize};

use crate::dataset::{Preprocessor, Schema};
use crate::error::{Error, Result};
use crate::forest::{from_json_unbounded, ForestDocument, RandomForest};

const MODEL_FORMAT: &str = "smote-ga-rf-model";
pub const MODEL_VERSION: u32 = 1;

/// Everything `predict` needs: the input schema, the fitted preprocessing,
/// the selected columns and the forest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format: String,
    pub version: u32,
    pub schema: Schema,
    pub preprocessor: Preprocessor,
    /// Names of the preprocessed columns the forest was trained on.
    pub selected_features: Vec<String>,
    pub positive_class: String,
    pub forest: ForestDocument,
}

impl ModelBundle {
    pub fn new(
        schema: Schema,
        preprocessor: Preprocessor,
        selected_features: Vec<String>,
        positive_class: String,
        forest: &RandomForest,
    ) -> Self {
        ModelBundle {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            schema,
            preprocessor,
            selected_features,
            positive_class,
            forest: ForestDocument::new(forest, false),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<(Self, RandomForest)> {
        let bundle: ModelBundle = from_json_unbounded(text)
            .map_err(|e| Error::Model(format!("cannot parse model: {e}")))?;
        if bundle.format != MODEL_FORMAT {
            return Err(Error::Model(format!(
                "unexpected format `{}`",
                bundle.format
            )));
        }
        if bundle.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {}",
                bundle.version
            )));
        }
        let forest = bundle.forest.clone().check()?;
        if forest.feature_names != bundle.selected_features {
            return Err(Error::Model(
                "forest features do not match the selected features".into(),
            ));
        }
        if !forest.class_names.contains(&bundle.positive_class) {
            return Err(Error::Model(format!(
                "positive class `{}` is not a model class",
                bundle.positive_class
            )));
        }
        Ok((bundle, forest))
    }

    /// Column indices of the selected features within the preprocessed data.
    pub fn selected_columns(&self) -> Result<Vec<usize>> {
        let kept = self.preprocessor.kept_names();
        self.selected_features
            .iter()
            .map(|name| {
                kept.iter().position(|k| k == name).ok_or_else(|| {
                    Error::Model(format!(
                        "selected feature `{name}` not produced by preprocessing"
                    ))
                })
            })
            .collect()
    }
}
