//! Behavior of the other agents (IDM + MOBIL + lane filter) and the ego's
//! discrete action set.

pub mod actions;
pub mod idm;
pub mod mobil;

use serde::{Deserialize, Serialize};

use crate::world::{Command, LaneCommand, WorldState};

pub use actions::{gap_keeping_acceleration, primitive_action, Action, Primitive};
pub use idm::{desired_gap, idm_acceleration, IdmParams, MAX_BRAKING};
pub use mobil::{
    lane_acceleration, lane_change_admissible, leader_acceleration, mobil_incentive,
    mobil_lane_decision, LaneFilterParams, MobilParams,
};

/// Desired speed of the ego's gap-keeping primitive (m/s).
pub const EGO_DESIRED_VELOCITY: f64 = 14.0;

/// Parameter file with sections `idm`, `mobil` and `lane_filter`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct BehaviorParams {
    pub idm: IdmParams,
    pub mobil: MobilParams,
    pub lane_filter: LaneFilterParams,
}

impl BehaviorParams {
    pub fn validate(&self) -> Result<(), String> {
        self.idm.validate()?;
        if !(self.mobil.safe_deceleration > 0.0) {
            return Err("mobil.safe_deceleration must be positive".into());
        }
        let f = &self.lane_filter;
        if !(f.min_rear_distance >= 0.0 && f.min_front_distance >= 0.0 && f.time_gap >= 0.0) {
            return Err("lane_filter distances and time gap must be non-negative".into());
        }
        Ok(())
    }

    /// IDM used by the ego's gap-keeping primitive.
    pub fn ego_idm(&self) -> IdmParams {
        self.idm.with_desired_velocity(EGO_DESIRED_VELOCITY)
    }
}

/// Commands for every agent: `ego` for the ego, the behavior model for the
/// rest. All decisions read the same pre-step state.
pub fn joint_commands(w: &WorldState, ego: Command, p: &BehaviorParams) -> Vec<Command> {
    (0..w.agents.len())
        .map(|i| {
            if w.agents[i].id == w.ego {
                return ego;
            }
            let lane = mobil_lane_decision(w, i, &p.idm, &p.mobil, &p.lane_filter);
            Command {
                accel: other_acceleration(w, i, lane, &p.idm),
                lane,
            }
        })
        .collect()
}

fn other_acceleration(w: &WorldState, i: usize, lane: LaneCommand, idm: &IdmParams) -> f64 {
    match lane {
        LaneCommand::ChangeTo(target) => {
            let me = &w.agents[i];
            lane_acceleration(w, i, target, idm).min(leader_acceleration(w, i, me.lane, idm))
        }
        LaneCommand::Keep => gap_keeping_acceleration(w, i, idm),
    }
}
