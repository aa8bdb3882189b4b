//! Labeling function: grounded propositions of a world state seen from the
//! ego vehicle.
//!
//! | name       | slot  | meaning                                              |
//! |------------|-------|------------------------------------------------------|
//! | `sd_front` | -     | gap to every vehicle ahead of or beside the ego, on any lane it touches, is at least the safe distance |
//! | `collide`  | -     | ego overlaps another vehicle or ran off the road     |
//! | `at_goal`  | -     | ego is inside its goal interval                      |
//! | `idf`      | agent | agent is the nearest unmerged ending-lane vehicle ahead |
//! | `m`        | agent | agent is on the continuing lane with its blend complete |
//! | `ahead`    | agent | ego's arc length exceeds the agent's                 |

use serde::{Deserialize, Serialize};

use crate::ltlf::{Atom, LabelSet, Slot, Valuation};

use super::agent::{AgentId, AgentState};
use super::map::{CONTINUING_LANE, ENDING_LANE};
use super::state::WorldState;

pub const SD_FRONT: &str = "sd_front";
pub const COLLIDE: &str = "collide";
pub const AT_GOAL: &str = "at_goal";
pub const IN_DIRECT_FRONT: &str = "idf";
pub const MERGED: &str = "m";
pub const AHEAD: &str = "ahead";

/// Proposition names without an agent slot.
pub const EGO_LABELS: [&str; 3] = [SD_FRONT, COLLIDE, AT_GOAL];
/// Proposition names that take an agent slot.
pub const AGENT_LABELS: [&str; 3] = [IN_DIRECT_FRONT, MERGED, AHEAD];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SafeDistanceParams {
    /// Time headway (s).
    pub headway: f64,
    /// Standstill floor (m).
    pub minimum: f64,
}

impl Default for SafeDistanceParams {
    fn default() -> Self {
        SafeDistanceParams {
            headway: 1.0,
            minimum: 2.0,
        }
    }
}

pub fn safe_distance_threshold(v: f64, params: &SafeDistanceParams) -> f64 {
    params.minimum.max(v * params.headway)
}

/// Per-agent flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AgentLabels {
    pub idf: bool,
    pub merged: bool,
    pub ahead: bool,
}

/// All propositions for one ego at one world state, except `alive`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldLabels {
    pub sd_front: bool,
    pub collide: bool,
    pub at_goal: bool,
    pub agents: Vec<(AgentId, AgentLabels)>,
}

fn unmerged_on_ending_lane(a: &AgentState) -> bool {
    a.lane == ENDING_LANE || a.change.is_some_and(|c| c.from == ENDING_LANE)
}

impl WorldLabels {
    pub fn compute(w: &WorldState) -> Self {
        let ei = w.ego_index();
        let ego = &w.agents[ei];
        // Every lane the ego touches counts, including the source lane of a
        // lane change. A vehicle that overlaps the ego longitudinally is a
        // leader at negative gap, even if its centre is already behind.
        let min_gap = safe_distance_threshold(ego.v, &w.safe_distance);
        let sd_front = w
            .others()
            .filter(|o| {
                [CONTINUING_LANE, ENDING_LANE]
                    .into_iter()
                    .any(|l| ego.occupies(l) && o.occupies(l))
            })
            .filter(|o| o.s - ego.s > -(ego.half_length() + o.half_length()))
            .all(|o| o.s - ego.s - ego.half_length() - o.half_length() >= min_gap);
        let idf = w
            .others()
            .filter(|o| unmerged_on_ending_lane(o) && o.s > ego.s)
            .min_by(|a, b| (a.s, a.id).partial_cmp(&(b.s, b.id)).unwrap())
            .map(|o| o.id);
        let agents = w
            .others()
            .map(|o| {
                (
                    o.id,
                    AgentLabels {
                        idf: idf == Some(o.id),
                        merged: o.lane == CONTINUING_LANE && o.change.is_none(),
                        ahead: ego.s > o.s,
                    },
                )
            })
            .collect();
        WorldLabels {
            sd_front,
            collide: w.ego_collides(),
            at_goal: w.ego_at_goal(),
            agents,
        }
    }

    pub fn of(&self, id: AgentId) -> Option<AgentLabels> {
        self.agents.iter().find(|(a, _)| *a == id).map(|(_, l)| *l)
    }

    /// Materializes the labels relevant to `other` (or only the ego labels).
    pub fn to_label_set(&self, other: Option<AgentId>, alive: bool) -> LabelSet {
        let mut set = LabelSet::new(alive);
        for name in EGO_LABELS {
            let atom = Atom::new(name);
            if self.holds(&atom) {
                set.insert(atom);
            }
        }
        let ids: Vec<AgentId> = match other {
            Some(id) => vec![id],
            None => self.agents.iter().map(|(id, _)| *id).collect(),
        };
        for id in ids {
            for name in AGENT_LABELS {
                let atom = Atom::for_agent(name, id);
                if self.holds(&atom) {
                    set.insert(atom);
                }
            }
        }
        set
    }
}

impl Valuation for WorldLabels {
    /// Unknown names and agents that are not present evaluate to false.
    fn holds(&self, atom: &Atom) -> bool {
        match (&atom.slot, atom.name.as_str()) {
            (None, SD_FRONT) => self.sd_front,
            (None, COLLIDE) => self.collide,
            (None, AT_GOAL) => self.at_goal,
            (Some(Slot::Agent(id)), name) => match self.of(*id) {
                Some(l) => match name {
                    IN_DIRECT_FRONT => l.idf,
                    MERGED => l.merged,
                    AHEAD => l.ahead,
                    _ => false,
                },
                None => false,
            },
            _ => false,
        }
    }
}

/// Labels for one (ego, other) binding. `alive` is cleared on the final step.
pub fn label_world(w: &WorldState, other: AgentId, is_final_step: bool) -> LabelSet {
    WorldLabels::compute(w).to_label_set(Some(other), !is_final_step)
}

/// Whether `name` is a proposition this labeling function can decide.
pub fn is_known_label(atom: &Atom) -> bool {
    match atom.slot {
        None => EGO_LABELS.contains(&atom.name.as_str()),
        Some(_) => AGENT_LABELS.contains(&atom.name.as_str()),
    }
}
