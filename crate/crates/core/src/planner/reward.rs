//! Reward vectors and the per-variant reward layouts.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ltlf::rules::{SAFE_DISTANCE, ZIPPER};

pub const MAX_REWARD_DIMS: usize = 8;

/// Fixed-capacity vector of rewards, index 0 being the highest priority.
#[derive(Clone, Copy, PartialEq)]
pub struct RewardVector {
    values: [f64; MAX_REWARD_DIMS],
    len: usize,
}

impl RewardVector {
    pub fn zeros(len: usize) -> Self {
        assert!(
            (1..=MAX_REWARD_DIMS).contains(&len),
            "reward dimension {len} out of range"
        );
        RewardVector {
            values: [0.0; MAX_REWARD_DIMS],
            len,
        }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        let mut r = RewardVector::zeros(v.len());
        r.values[..v.len()].copy_from_slice(v);
        r
    }

    pub fn filled(len: usize, x: f64) -> Self {
        let mut r = RewardVector::zeros(len);
        r.iter_mut().for_each(|v| *v = x);
        r
    }

    /// `self += k * other`
    pub fn add_scaled(&mut self, other: &RewardVector, k: f64) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += k * b;
        }
    }

    pub fn scaled(&self, k: f64) -> RewardVector {
        let mut r = *self;
        r.iter_mut().for_each(|v| *v *= k);
        r
    }

    pub fn sum(&self) -> f64 {
        self.iter().sum()
    }
}

impl Deref for RewardVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values[..self.len]
    }
}

impl DerefMut for RewardVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.values[..self.len]
    }
}

impl fmt::Debug for RewardVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl Serialize for RewardVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (**self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RewardVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        if v.is_empty() || v.len() > MAX_REWARD_DIMS {
            return Err(serde::de::Error::custom(format!(
                "reward dimension {} out of range",
                v.len()
            )));
        }
        Ok(RewardVector::from_slice(&v))
    }
}

/// Scalar reward terms that the layouts distribute over dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    Collision,
    Zipper,
    SafeDistance,
    Base,
}

impl Component {
    /// Name of the rule feeding this component, if any.
    pub fn rule(self) -> Option<&'static str> {
        match self {
            Component::Zipper => Some(ZIPPER),
            Component::SafeDistance => Some(SAFE_DISTANCE),
            _ => None,
        }
    }
}

/// Ego behavior variants, differing only in their reward vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "SA")]
    Sa,
    #[serde(rename = "SA-Lex")]
    SaLex,
    #[serde(rename = "SA-Lex-Zip")]
    SaLexZip,
    #[serde(rename = "SA-Lex-SD")]
    SaLexSd,
    #[serde(rename = "SA-Lex-Zip-SD")]
    SaLexZipSd,
    #[serde(rename = "SA-Lex-SD-Zip")]
    SaLexSdZip,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Sa,
        Variant::SaLex,
        Variant::SaLexZip,
        Variant::SaLexSd,
        Variant::SaLexZipSd,
        Variant::SaLexSdZip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Sa => "SA",
            Variant::SaLex => "SA-Lex",
            Variant::SaLexZip => "SA-Lex-Zip",
            Variant::SaLexSd => "SA-Lex-SD",
            Variant::SaLexZipSd => "SA-Lex-Zip-SD",
            Variant::SaLexSdZip => "SA-Lex-SD-Zip",
        }
    }

    /// Components summed into each dimension, highest priority first.
    pub fn layout(self) -> &'static [&'static [Component]] {
        use Component::*;
        match self {
            Variant::Sa => &[&[Collision, Base]],
            Variant::SaLex => &[&[Collision], &[Base]],
            Variant::SaLexZip => &[&[Collision], &[Zipper], &[Base]],
            Variant::SaLexSd => &[&[Collision], &[SafeDistance], &[Base]],
            Variant::SaLexZipSd => &[&[Collision], &[Zipper], &[SafeDistance], &[Base]],
            Variant::SaLexSdZip => &[&[Collision], &[SafeDistance], &[Zipper], &[Base]],
        }
    }

    pub fn dims(self) -> usize {
        self.layout().len()
    }

    /// Dimension that `c` contributes to, if the variant uses it.
    pub fn dimension_of(self, c: Component) -> Option<usize> {
        self.layout().iter().position(|d| d.contains(&c))
    }

    /// Rules whose monitors the planner carries for this variant.
    pub fn rules(self) -> Vec<&'static str> {
        self.layout()
            .iter()
            .flat_map(|d| d.iter())
            .filter_map(|c| c.rule())
            .collect()
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
                format!(
                    "unknown variant `{s}`; expected one of {}",
                    names.join(", ")
                )
            })
    }
}

/// Per-component rewards of one transition.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepRewards {
    pub collision: f64,
    pub zipper: f64,
    pub safe_distance: f64,
    pub accel: f64,
    pub lateral: f64,
    pub velocity: f64,
    pub shaping: f64,
}

impl StepRewards {
    pub fn base(&self) -> f64 {
        self.accel + self.lateral + self.velocity + self.shaping
    }

    pub fn component(&self, c: Component) -> f64 {
        match c {
            Component::Collision => self.collision,
            Component::Zipper => self.zipper,
            Component::SafeDistance => self.safe_distance,
            Component::Base => self.base(),
        }
    }

    pub fn assemble(&self, variant: Variant) -> RewardVector {
        let layout = variant.layout();
        let mut r = RewardVector::zeros(layout.len());
        for (slot, comps) in r.iter_mut().zip(layout) {
            *slot = comps.iter().map(|c| self.component(*c)).sum();
        }
        r
    }
}
