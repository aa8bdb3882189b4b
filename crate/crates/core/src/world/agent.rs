//! Agent kinematics: constant-acceleration longitudinal motion and lane
//! changes as smooth-step lateral blends.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::map::{LaneId, MergingMap, ENDING_LANE};

pub type AgentId = crate::ltlf::AgentId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Footprint {
    pub length: f64,
    pub width: f64,
}

impl Default for Footprint {
    fn default() -> Self {
        Footprint {
            length: 4.5,
            width: 1.8,
        }
    }
}

/// An in-progress lane change. The lateral position follows a smooth-step
/// profile over `length` metres of travel starting at `start_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneChange {
    pub from: LaneId,
    pub start_s: f64,
    pub length: f64,
}

impl LaneChange {
    pub fn progress(&self, s: f64) -> f64 {
        ((s - self.start_s) / self.length).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: AgentId,
    /// Target lane while a change is in progress.
    pub lane: LaneId,
    pub s: f64,
    /// Offset from the centerline of `lane`, positive towards lane 1.
    pub lateral: f64,
    pub v: f64,
    pub a: f64,
    pub theta: f64,
    pub theta_rate: f64,
    pub footprint: Footprint,
    pub change: Option<LaneChange>,
}

impl AgentState {
    /// An agent driving straight along the centerline of `lane`.
    pub fn on_lane(id: AgentId, lane: LaneId, s: f64, v: f64, footprint: Footprint) -> Self {
        AgentState {
            id,
            lane,
            s,
            lateral: 0.0,
            v,
            a: 0.0,
            theta: 0.0,
            theta_rate: 0.0,
            footprint,
            change: None,
        }
    }

    /// Whether the agent's body is (partly) in `lane`: its target lane, or
    /// the lane it is blending away from.
    pub fn occupies(&self, lane: LaneId) -> bool {
        self.lane == lane || self.change.is_some_and(|c| c.from == lane)
    }

    pub fn is_changing(&self) -> bool {
        self.change.is_some()
    }

    pub fn half_length(&self) -> f64 {
        0.5 * self.footprint.length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LaneCommand {
    Keep,
    ChangeTo(LaneId),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub accel: f64,
    pub lane: LaneCommand,
}

impl Command {
    pub fn keep(accel: f64) -> Self {
        Command {
            accel,
            lane: LaneCommand::Keep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KinematicParams {
    /// Duration of a lane change at constant speed (s).
    pub lane_change_duration: f64,
    /// Lower bound on the blend length so that slow changes stay smooth (m).
    pub min_blend_length: f64,
}

impl Default for KinematicParams {
    fn default() -> Self {
        KinematicParams {
            lane_change_duration: 2.0,
            min_blend_length: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommandError {
    #[error("agent {agent}: lane {lane} does not exist")]
    NoSuchLane { agent: AgentId, lane: LaneId },
    #[error("agent {agent}: lane {lane} has ended at s = {s:.2}")]
    LaneEnded {
        agent: AgentId,
        lane: LaneId,
        s: f64,
    },
    #[error("agent {agent}: already on lane {lane}")]
    SameLane { agent: AgentId, lane: LaneId },
    #[error("agent {agent}: lane change already in progress")]
    Busy { agent: AgentId },
    #[error("step size must be positive, got {0}")]
    StepSize(f64),
}

/// Result of advancing one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Moved {
    pub agent: AgentState,
    /// The agent ran into the end of the ending lane and was stopped there.
    pub hit_lane_end: bool,
}

fn smoothstep(u: f64) -> f64 {
    u * u * (3.0 - 2.0 * u)
}

fn smoothstep_slope(u: f64) -> f64 {
    6.0 * u * (1.0 - u)
}

/// Advances `a` by `dt` under `cmd`.
pub fn step_agent(
    a: &AgentState,
    cmd: Command,
    dt: f64,
    map: &MergingMap,
    params: &KinematicParams,
) -> Result<Moved, CommandError> {
    if !(dt > 0.0) {
        return Err(CommandError::StepSize(dt));
    }
    let mut change = a.change;
    let mut lane = a.lane;
    if let LaneCommand::ChangeTo(target) = cmd.lane {
        let agent = a.id;
        if target as usize >= map.num_lanes() {
            return Err(CommandError::NoSuchLane {
                agent,
                lane: target,
            });
        }
        if a.change.is_some() {
            return Err(CommandError::Busy { agent });
        }
        if target == a.lane {
            return Err(CommandError::SameLane {
                agent,
                lane: target,
            });
        }
        if !map.lane_exists_at(target, a.s) {
            return Err(CommandError::LaneEnded {
                agent,
                lane: target,
                s: a.s,
            });
        }
        change = Some(LaneChange {
            from: a.lane,
            start_s: a.s,
            length: (a.v * params.lane_change_duration).max(params.min_blend_length),
        });
        lane = target;
    }

    let (mut s, mut v) = if a.v + cmd.accel * dt >= 0.0 {
        (
            a.s + a.v * dt + 0.5 * cmd.accel * dt * dt,
            a.v + cmd.accel * dt,
        )
    } else {
        let t_stop = a.v / -cmd.accel;
        (a.s + 0.5 * a.v * t_stop, 0.0)
    };

    let mut hit_lane_end = false;
    if lane == ENDING_LANE && s > map.s_merge() {
        s = map.s_merge();
        v = 0.0;
        hit_lane_end = true;
    }

    let (lateral, theta) = match change {
        Some(c) => {
            let dy = map.lane_offset(lane) - map.lane_offset(c.from);
            let u = c.progress(s);
            if u >= 1.0 {
                change = None;
                (0.0, 0.0)
            } else {
                let lateral = -dy * (1.0 - smoothstep(u));
                (lateral, (dy * smoothstep_slope(u) / c.length).atan())
            }
        }
        None => (0.0, 0.0),
    };

    Ok(Moved {
        agent: AgentState {
            id: a.id,
            lane,
            s,
            lateral,
            v,
            a: cmd.accel,
            theta,
            theta_rate: (theta - a.theta) / dt,
            footprint: a.footprint,
            change,
        },
        hit_lane_end,
    })
}
