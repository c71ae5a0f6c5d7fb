use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{Mode, PipelineConfig, SmoteScope};
use crate::forest::ForestConfig;
use crate::gafs::{FitnessSpec, GaConfig};
use crate::smote::SmoteConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeChoice {
    PerFold,
    Global,
    /// Run every mode under both scopes.
    Both,
}

impl ScopeChoice {
    pub fn scopes(self) -> Vec<SmoteScope> {
        match self {
            ScopeChoice::PerFold => vec![SmoteScope::PerFold],
            ScopeChoice::Global => vec![SmoteScope::Global],
            ScopeChoice::Both => vec![SmoteScope::PerFold, SmoteScope::Global],
        }
    }
}

impl std::str::FromStr for ScopeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_fold" => Ok(ScopeChoice::PerFold),
            "global" => Ok(ScopeChoice::Global),
            "both" => Ok(ScopeChoice::Both),
            other => Err(Error::Config(format!(
                "unknown SMOTE scope `{other}` (expected per_fold, global or both)"
            ))),
        }
    }
}

/// The one JSON config file shared by every subcommand. Missing fields take
/// their defaults; command-line flags override the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Modes run by `pipeline`.
    pub modes: Vec<Mode>,
    pub smote_scope: ScopeChoice,
    pub cv_folds: usize,
    pub smote: SmoteConfig,
    pub ga: GaConfig,
    pub fitness: FitnessSpec,
    pub forest: ForestConfig,
    pub positive_class: Option<String>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        RunConfig {
            modes: Mode::ALL.to_vec(),
            smote_scope: ScopeChoice::PerFold,
            cv_folds: p.cv_folds,
            smote: p.smote,
            ga: p.ga,
            fitness: p.fitness,
            forest: p.forest,
            positive_class: p.positive_class,
            seed: p.seed,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn pipeline(&self, mode: Mode, smote_scope: SmoteScope) -> PipelineConfig {
        PipelineConfig {
            mode,
            smote_scope,
            cv_folds: self.cv_folds,
            smote: self.smote.clone(),
            ga: self.ga.clone(),
            fitness: self.fitness.clone(),
            forest: self.forest.clone(),
            positive_class: self.positive_class.clone(),
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::Config("no modes listed".into()));
        }
        for &mode in &self.modes {
            for scope in self.smote_scope.scopes() {
                self.pipeline(mode, scope).validate()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_files() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.smote.k_neighbors, 6);
        assert_eq!(cfg.ga.population_size, 100);
        assert_eq!(cfg.cv_folds, 10);

        let cfg =
            RunConfig::from_json(r#"{"modes": ["rf_only"], "ga": {"generations": 3}}"#).unwrap();
        assert_eq!(cfg.modes, vec![Mode::RfOnly]);
        assert_eq!(cfg.ga.generations, 3);
        assert_eq!(cfg.ga.population_size, 100);
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn scope_parsing() {
        assert_eq!("both".parse::<ScopeChoice>().unwrap().scopes().len(), 2);
        assert!("everywhere".parse::<ScopeChoice>().is_err());
    }
}
