//! Pipeline settings and the line-oriented `key = value` config format.
//!
//! ```text
//! # comments and blank lines are ignored
//! ring_skip = 0.10
//! ring_take = 0.20
//! glcm_levels = 16
//! texture_window = 5
//! median_window = 5
//! majority_window = 5
//! confidence = 0.25
//! min_leaf = 2
//! max_depth = none
//! per_class = 100
//! seed = 0
//! ```

use std::str::FromStr;

use thiserror::Error;

use crate::dtree::InductionConfig;
use crate::features::FeatureConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("unknown profile `{0}` (expected `default` or `paper`)")]
    UnknownProfile(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Default,
    Paper,
}

impl FromStr for Profile {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(Profile::Default),
            "paper" => Ok(Profile::Paper),
            _ => Err(ConfigError::UnknownProfile(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub features: FeatureConfig,
    pub majority_window: usize,
    pub induction: InductionConfig,
    /// Training pixels drawn per class and image.
    pub per_class: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::profile(Profile::Default)
    }
}

impl PipelineConfig {
    /// The `paper` profile differs from `default` only in heavier pruning
    /// (C = 0.1) and larger leaves (M = 100).
    pub fn profile(profile: Profile) -> Self {
        let induction = match profile {
            Profile::Default => InductionConfig::default(),
            Profile::Paper => InductionConfig::paper(),
        };
        Self {
            features: FeatureConfig::default(),
            majority_window: 5,
            induction,
            per_class: 100,
            seed: 0,
        }
    }

    /// Applies `key = value` lines on top of the current settings.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|msg| ConfigError::Syntax { line, msg })?;
        }
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("`{key}`: cannot parse `{value}`"))
        }
        match key {
            "ring_skip" => self.features.ring_skip = num(key, value)?,
            "ring_take" => self.features.ring_take = num(key, value)?,
            "glcm_levels" => self.features.glcm_levels = num(key, value)?,
            "texture_window" => self.features.texture_window = num(key, value)?,
            "median_window" => self.features.median_window = num(key, value)?,
            "majority_window" => self.majority_window = num(key, value)?,
            "confidence" => self.induction.confidence = num(key, value)?,
            "min_leaf" => self.induction.min_leaf = num(key, value)?,
            "max_depth" => {
                self.induction.max_depth = match value {
                    "none" => None,
                    v => Some(num(key, v)?),
                }
            }
            "per_class" => self.per_class = num(key, value)?,
            "seed" => {
                self.seed = num(key, value)?;
                self.induction.seed = self.seed;
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let f = &self.features;
        if !(f.ring_skip >= 0.0 && f.ring_skip.is_finite()) {
            return Err(ConfigError::Invalid(format!("ring_skip {} must be >= 0", f.ring_skip)));
        }
        if !(f.ring_take > 0.0 && f.ring_take.is_finite()) {
            return Err(ConfigError::Invalid(format!("ring_take {} must be > 0", f.ring_take)));
        }
        for (key, w) in [
            ("texture_window", f.texture_window),
            ("median_window", f.median_window),
            ("majority_window", self.majority_window),
        ] {
            if w < 3 || w % 2 == 0 {
                return Err(ConfigError::Invalid(format!("{key} {w} must be odd and at least 3")));
            }
        }
        f.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.induction
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.per_class == 0 {
            return Err(ConfigError::Invalid("per_class must be positive".into()));
        }
        Ok(())
    }
}
