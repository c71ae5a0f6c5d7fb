use serde::{Deserialize, Serialize};

use super::RandomForest;
use crate::error::{Error, Result};

pub const FOREST_FORMAT_VERSION: u32 = 1;
const FOREST_FORMAT: &str = "random-forest";

/// Versioned JSON form of a fitted forest. Trees are nested node objects.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestDocument {
    pub format: String,
    pub version: u32,
    pub forest: RandomForest,
}

impl ForestDocument {
    pub fn new(forest: &RandomForest, include_in_bag: bool) -> Self {
        let mut forest = forest.clone();
        if !include_in_bag {
            forest.in_bag.clear();
        }
        ForestDocument {
            format: FOREST_FORMAT.into(),
            version: FOREST_FORMAT_VERSION,
            forest,
        }
    }

    pub fn check(self) -> Result<RandomForest> {
        if self.format != FOREST_FORMAT {
            return Err(Error::Model(format!("unexpected format `{}`", self.format)));
        }
        if self.version != FOREST_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported forest version {}",
                self.version
            )));
        }
        let f = &self.forest;
        if f.trees.is_empty() {
            return Err(Error::Model("forest has no trees".into()));
        }
        if !f.in_bag.is_empty() && f.in_bag.len() != f.trees.len() {
            return Err(Error::Model(
                "in-bag table does not match tree count".into(),
            ));
        }
        Ok(self.forest)
    }
}

/// Deserializes JSON without serde_json's nesting limit; deep trees nest
/// deeper than the default allows.
pub(crate) fn from_json_unbounded<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let value = T::deserialize(&mut de)?;
    de.end()?;
    Ok(value)
}

impl RandomForest {
    pub fn to_json(&self, include_in_bag: bool) -> String {
        serde_json::to_string(&ForestDocument::new(self, include_in_bag))
            .expect("forest serializes")
    }

    pub fn from_json(text: &str) -> Result<RandomForest> {
        from_json_unbounded::<ForestDocument>(text)?.check()
    }
}
