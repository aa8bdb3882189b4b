//! Planner configuration file.
//!
//! ```toml
//! variant = "SA-Lex-Zip-SD"
//! iterations = 1000
//! seed = 0
//! horizon = 10
//! discount = 0.95
//! exploration = 1.0
//! reference_velocity = 14.0
//! rollout = "gap_keep"      # or "uniform_random", or an action name
//!
//! [weights]
//! collision = 20.0
//! acceleration = 0.01
//! lateral = 0.02
//! velocity = 0.1
//! potential = 0.1
//!
//! [thresholds]
//! collision = -10.0
//! zipper = -0.5
//! safe_distance = -0.5
//! ```
//!
//! Rule weights come from the rule file. The base dimension has no
//! threshold.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::Action;

use super::reward::{Component, RewardVector, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RolloutPolicy {
    GapKeep,
    UniformRandom,
    Constant(Action),
}

impl FromStr for RolloutPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gap_keep" => Ok(RolloutPolicy::GapKeep),
            "uniform_random" => Ok(RolloutPolicy::UniformRandom),
            other => other
                .parse::<Action>()
                .map(RolloutPolicy::Constant)
                .map_err(|_| format!("unknown rollout policy `{other}`")),
        }
    }
}

impl TryFrom<String> for RolloutPolicy {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl fmt::Display for RolloutPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RolloutPolicy::GapKeep => f.write_str("gap_keep"),
            RolloutPolicy::UniformRandom => f.write_str("uniform_random"),
            RolloutPolicy::Constant(a) => write!(f, "{a}"),
        }
    }
}

impl From<RolloutPolicy> for String {
    fn from(p: RolloutPolicy) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub collision: f64,
    pub acceleration: f64,
    pub lateral: f64,
    pub velocity: f64,
    pub potential: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            collision: 20.0,
            acceleration: 0.01,
            lateral: 0.02,
            velocity: 0.1,
            potential: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub collision: f64,
    pub zipper: f64,
    pub safe_distance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            collision: -10.0,
            zipper: -0.5,
            safe_distance: -0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub variant: Variant,
    pub iterations: usize,
    pub seed: u64,
    pub horizon: usize,
    pub discount: f64,
    pub exploration: f64,
    pub reference_velocity: f64,
    pub rollout: RolloutPolicy,
    pub weights: RewardWeights,
    pub thresholds: Thresholds,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            variant: Variant::SaLexZipSd,
            iterations: 1000,
            seed: 0,
            horizon: 10,
            discount: 0.95,
            exploration: 1.0,
            reference_velocity: 14.0,
            rollout: RolloutPolicy::GapKeep,
            weights: RewardWeights::default(),
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

impl PlannerConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: PlannerConfig = toml::from_str(text)?;
        cfg.validate().map_err(ConfigError::Invalid)?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.iterations == 0 {
            return Err("iterations must be positive".into());
        }
        if self.horizon == 0 {
            return Err("horizon must be positive".into());
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(format!(
                "discount must lie in (0, 1], got {}",
                self.discount
            ));
        }
        if !(self.exploration >= 0.0) {
            return Err("exploration must be non-negative".into());
        }
        let w = &self.weights;
        for (name, x) in [
            ("collision", w.collision),
            ("acceleration", w.acceleration),
            ("lateral", w.lateral),
            ("velocity", w.velocity),
            ("potential", w.potential),
        ] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(format!("weights.{name} must be non-negative, got {x}"));
            }
        }
        Ok(())
    }

    /// Threshold per reward dimension of the configured variant.
    pub fn threshold_vector(&self) -> RewardVector {
        let layout = self.variant.layout();
        let mut tau = RewardVector::zeros(layout.len());
        for (t, comps) in tau.iter_mut().zip(layout) {
            *t = match comps[0] {
                Component::Collision => self.thresholds.collision,
                Component::Zipper => self.thresholds.zipper,
                Component::SafeDistance => self.thresholds.safe_distance,
                Component::Base => f64::NEG_INFINITY,
            };
        }
        tau
    }
}
