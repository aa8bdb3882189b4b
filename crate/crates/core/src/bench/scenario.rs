//! Scenario files.
//!
//! ```toml
//! name = "merge-00"
//! seed = 7
//! ego = 0
//! time_limit = 30.0
//! dt = 0.5
//! unsafe_start = false
//!
//! [map]
//! length = 220.0
//! s_merge = 140.0
//! lane_width = 3.5
//!
//! [goal]
//! s_min = 190.0
//! s_max = 215.0
//!
//! [[agents]]
//! id = 0
//! lane = 0
//! s = 20.0
//! v = 14.0
//! ```
//!
//! Agents may also set `length` and `width` (m). Validation errors name the
//! offending field and its line.

use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::world::{
    check_collision, AgentState, Footprint, Goal, KinematicParams, MapParams, MergingMap,
    SafeDistanceParams, WorldState, CONTINUING_LANE, ENDING_LANE,
};

pub type AgentId = crate::ltlf::AgentId;

pub const DEFAULT_TIME_LIMIT: f64 = 30.0;
pub const DEFAULT_DT: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error("line {line}: field `{field}`: {message}")]
    Invalid {
        field: String,
        line: usize,
        message: String,
    },
    #[error("agents {a} and {b} overlap at the start; set `unsafe_start = true` to allow this")]
    Overlap { a: AgentId, b: AgentId },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: AgentId,
    pub lane: u8,
    pub s: f64,
    pub v: f64,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_width")]
    pub width: f64,
}

fn default_length() -> f64 {
    Footprint::default().length
}

fn default_width() -> f64 {
    Footprint::default().width
}

impl AgentSpec {
    pub fn footprint(&self) -> Footprint {
        Footprint {
            length: self.length,
            width: self.width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub ego: AgentId,
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub unsafe_start: bool,
    pub map: MapParams,
    pub goal: Goal,
    pub agents: Vec<AgentSpec>,
}

fn default_time_limit() -> f64 {
    DEFAULT_TIME_LIMIT
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

// Mirror of the file layout that keeps source positions for validation.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    id: Spanned<i64>,
    lane: Spanned<i64>,
    s: Spanned<f64>,
    v: Spanned<f64>,
    length: Option<Spanned<f64>>,
    width: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    length: Spanned<f64>,
    s_merge: Spanned<f64>,
    lane_width: Spanned<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGoal {
    s_min: Spanned<f64>,
    s_max: Spanned<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    seed: Spanned<i64>,
    ego: Spanned<i64>,
    time_limit: Option<Spanned<f64>>,
    dt: Option<Spanned<f64>>,
    #[serde(default)]
    unsafe_start: bool,
    map: RawMap,
    goal: RawGoal,
    agents: Vec<RawAgent>,
}

struct Validator<'a> {
    text: &'a str,
}

impl Validator<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())]
            .matches('\n')
            .count()
            + 1
    }

    fn err(
        &self,
        field: impl fmt::Display,
        span: Range<usize>,
        message: impl Into<String>,
    ) -> ScenarioError {
        ScenarioError::Invalid {
            field: field.to_string(),
            line: self.line(span),
            message: message.into(),
        }
    }

    fn positive(&self, field: impl fmt::Display, x: &Spanned<f64>) -> Result<f64, ScenarioError> {
        let v = *x.get_ref();
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(self.err(field, x.span(), format!("must be positive, got {v}")))
        }
    }

    fn finite(&self, field: impl fmt::Display, x: &Spanned<f64>) -> Result<f64, ScenarioError> {
        let v = *x.get_ref();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(field, x.span(), "must be finite"))
        }
    }

    fn id(&self, field: impl fmt::Display, x: &Spanned<i64>) -> Result<AgentId, ScenarioError> {
        AgentId::try_from(*x.get_ref())
            .map_err(|_| self.err(field, x.span(), format!("invalid agent id {}", x.get_ref())))
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let raw: RawScenario = toml::from_str(text)?;
        let val = Validator { text };

        let length = val.positive("map.length", &raw.map.length)?;
        let s_merge = val.positive("map.s_merge", &raw.map.s_merge)?;
        if s_merge > length {
            return Err(val.err(
                "map.s_merge",
                raw.map.s_merge.span(),
                "must not exceed map.length",
            ));
        }
        let lane_width = val.positive("map.lane_width", &raw.map.lane_width)?;
        let map = MapParams {
            length,
            s_merge,
            lane_width,
        };

        let s_min = val.finite("goal.s_min", &raw.goal.s_min)?;
        let s_max = val.finite("goal.s_max", &raw.goal.s_max)?;
        if !(0.0..=length).contains(&s_min) || s_max <= s_min {
            return Err(val.err(
                "goal",
                raw.goal.s_min.span(),
                "goal interval must satisfy 0 <= s_min < s_max",
            ));
        }

        let seed = u64::try_from(*raw.seed.get_ref())
            .map_err(|_| val.err("seed", raw.seed.span(), "must be non-negative"))?;
        let time_limit = match &raw.time_limit {
            Some(t) => val.positive("time_limit", t)?,
            None => DEFAULT_TIME_LIMIT,
        };
        let dt = match &raw.dt {
            Some(t) => val.positive("dt", t)?,
            None => DEFAULT_DT,
        };

        let mut agents = Vec::with_capacity(raw.agents.len());
        for (k, a) in raw.agents.iter().enumerate() {
            let f = |name: &str| format!("agents[{k}].{name}");
            let id = val.id(f("id"), &a.id)?;
            if agents.iter().any(|o: &AgentSpec| o.id == id) {
                return Err(val.err(f("id"), a.id.span(), format!("duplicate agent id {id}")));
            }
            let lane = match *a.lane.get_ref() {
                0 => CONTINUING_LANE,
                1 => ENDING_LANE,
                other => {
                    return Err(val.err(
                        f("lane"),
                        a.lane.span(),
                        format!("lane index must be 0 or 1, got {other}"),
                    ))
                }
            };
            let s = val.finite(f("s"), &a.s)?;
            let s_limit = if lane == ENDING_LANE { s_merge } else { length };
            if !(0.0..=s_limit).contains(&s) {
                return Err(val.err(
                    f("s"),
                    a.s.span(),
                    format!("must lie in [0, {s_limit}] on lane {lane}"),
                ));
            }
            let v = *a.v.get_ref();
            if !(v.is_finite() && v >= 0.0) {
                return Err(val.err(
                    f("v"),
                    a.v.span(),
                    format!("speed must be non-negative, got {v}"),
                ));
            }
            let length = match &a.length {
                Some(x) => val.positive(f("length"), x)?,
                None => default_length(),
            };
            let width = match &a.width {
                Some(x) => val.positive(f("width"), x)?,
                None => default_width(),
            };
            agents.push(AgentSpec {
                id,
                lane,
                s,
                v,
                length,
                width,
            });
        }
        let ego = val.id("ego", &raw.ego)?;
        if !agents.iter().any(|a| a.id == ego) {
            return Err(val.err("ego", raw.ego.span(), format!("no agent with id {ego}")));
        }

        let sc = Scenario {
            name: raw.name,
            seed,
            ego,
            time_limit,
            dt,
            unsafe_start: raw.unsafe_start,
            map,
            goal: Goal { s_min, s_max },
            agents,
        };
        sc.check_start()?;
        Ok(sc)
    }

    fn check_start(&self) -> Result<(), ScenarioError> {
        if self.unsafe_start {
            return Ok(());
        }
        let w = self.initial_world(KinematicParams::default(), SafeDistanceParams::default());
        for (i, a) in w.agents.iter().enumerate() {
            for b in &w.agents[i + 1..] {
                if check_collision(a, b, &w.map) {
                    return Err(ScenarioError::Overlap { a: a.id, b: b.id });
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn initial_world(
        &self,
        kinematics: KinematicParams,
        safe_distance: SafeDistanceParams,
    ) -> WorldState {
        WorldState {
            map: Arc::new(MergingMap::new(self.map)),
            agents: self
                .agents
                .iter()
                .map(|a| AgentState::on_lane(a.id, a.lane, a.s, a.v, a.footprint()))
                .collect(),
            ego: self.ego,
            goal: self.goal,
            t: 0.0,
            dt: self.dt,
            kinematics,
            safe_distance,
            ego_off_road: false,
        }
    }

    pub fn others(&self) -> Vec<AgentId> {
        self.agents
            .iter()
            .map(|a| a.id)
            .filter(|&id| id != self.ego)
            .collect()
    }
}

/// Validated scenario from `path`.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    Scenario::load(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"name = "two"
seed = 1
ego = 0

[map]
length = 220.0
s_merge = 140.0
lane_width = 3.5

[goal]
s_min = 190.0
s_max = 215.0

[[agents]]
id = 0
lane = 0
s = 20.0
v = 14.0

[[agents]]
id = 1
lane = 1
s = 40.0
v = 10.0
"#;

    #[test]
    fn minimal_two_agent_file() {
        let sc = Scenario::from_toml(MINIMAL).unwrap();
        assert_eq!(sc.agents[0].lane, CONTINUING_LANE);
        assert_eq!(sc.agents[1].lane, ENDING_LANE);
        assert_eq!(sc.time_limit, 30.0);
        assert_eq!(sc.others(), vec![1]);
        assert_eq!(Scenario::from_toml(&sc.to_toml()).unwrap(), sc);
    }

    #[test]
    fn bad_lane_names_field_and_line() {
        let text = MINIMAL.replace("lane = 1", "lane = 7");
        match Scenario::from_toml(&text) {
            Err(ScenarioError::Invalid { field, line, .. }) => {
                assert_eq!(field, "agents[1].lane");
                assert_eq!(line, 22);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_a_line() {
        let text = MINIMAL.replace("v = 10.0", "v = \"fast\"");
        let msg = Scenario::from_toml(&text).unwrap_err().to_string();
        assert!(msg.contains("line 24"), "{msg}");
    }

    #[test]
    fn overlapping_start_needs_flag() {
        let text = MINIMAL
            .replace("s = 40.0", "s = 22.0")
            .replace("lane = 1", "lane = 0");
        assert!(matches!(
            Scenario::from_toml(&text),
            Err(ScenarioError::Overlap { a: 0, b: 1 })
        ));
        let flagged = text.replace("ego = 0\n", "ego = 0\nunsafe_start = true\n");
        assert!(Scenario::from_toml(&flagged).is_ok());
    }
}
