//! Discrete ego motion primitives.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::world::{Command, LaneCommand, WorldState};

use super::idm::IdmParams;
use super::mobil::{lane_acceleration, leader_acceleration};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Coast,
    Accelerate,
    Brake,
    HardBrake,
    LaneChange,
    GapKeep,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::Coast,
        Action::Accelerate,
        Action::Brake,
        Action::HardBrake,
        Action::LaneChange,
        Action::GapKeep,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    /// Constant acceleration of the lane-keeping primitives.
    pub fn fixed_acceleration(self) -> Option<f64> {
        match self {
            Action::Coast => Some(0.0),
            Action::Accelerate => Some(1.0),
            Action::Brake => Some(-2.0),
            Action::HardBrake => Some(-8.0),
            Action::LaneChange | Action::GapKeep => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Coast => "coast",
            Action::Accelerate => "accel",
            Action::Brake => "brake",
            Action::HardBrake => "hard_brake",
            Action::LaneChange => "lane_change",
            Action::GapKeep => "gap_keep",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Action::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown action `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub command: Command,
    /// A lane change was requested where no adjacent lane exists.
    pub invalid_lane_change: bool,
}

/// Gap-keeping acceleration: IDM against the leader in every lane the agent
/// occupies. The end of a lane being left behind is not an obstacle.
pub fn gap_keeping_acceleration(w: &WorldState, i: usize, idm: &IdmParams) -> f64 {
    let me = &w.agents[i];
    let mut a = lane_acceleration(w, i, me.lane, idm);
    if let Some(c) = me.change {
        a = a.min(leader_acceleration(w, i, c.from, idm));
    }
    a
}

/// Command for the ego's `action`. `gap_keep` is the IDM used by the
/// gap-keeping primitive.
pub fn primitive_action(w: &WorldState, action: Action, gap_keep: &IdmParams) -> Primitive {
    let i = w.ego_index();
    let ego = &w.agents[i];
    let (command, invalid_lane_change) = match action {
        Action::GapKeep => (
            Command::keep(gap_keeping_acceleration(w, i, gap_keep)),
            false,
        ),
        Action::LaneChange => {
            let target = 1 - ego.lane;
            if ego.is_changing() || !w.map.lane_exists_at(target, ego.s) {
                (Command::keep(0.0), true)
            } else {
                (
                    Command {
                        accel: 0.0,
                        lane: LaneCommand::ChangeTo(target),
                    },
                    false,
                )
            }
        }
        fixed => (Command::keep(fixed.fixed_acceleration().unwrap()), false),
    };
    Primitive {
        command,
        invalid_lane_change,
    }
}
