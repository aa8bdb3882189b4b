//! MOBIL lane-change decisions with an admissibility filter.

use serde::{Deserialize, Serialize};

use crate::world::{LaneCommand, LaneId, WorldState, ENDING_LANE};

use super::idm::{idm_acceleration, IdmParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilParams {
    pub politeness: f64,
    /// m/s²
    pub safe_deceleration: f64,
    /// m/s²
    pub acceleration_threshold: f64,
}

impl Default for MobilParams {
    fn default() -> Self {
        MobilParams {
            politeness: 0.0,
            safe_deceleration: 4.0,
            acceleration_threshold: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaneFilterParams {
    /// m
    pub min_rear_distance: f64,
    /// m
    pub min_front_distance: f64,
    /// s
    pub time_gap: f64,
}

impl Default for LaneFilterParams {
    fn default() -> Self {
        LaneFilterParams {
            min_rear_distance: 0.5,
            min_front_distance: 1.0,
            time_gap: 0.5,
        }
    }
}

/// IDM acceleration of agent `i` behind the nearest vehicle in `lane`.
pub fn leader_acceleration(w: &WorldState, i: usize, lane: LaneId, idm: &IdmParams) -> f64 {
    let me = &w.agents[i];
    match w.leader(i, lane) {
        Some(l) => idm_acceleration(me.v, Some(l.gap), me.v - w.agents[l.index].v, idm),
        None => idm_acceleration(me.v, None, 0.0, idm),
    }
}

/// IDM acceleration of agent `i` if it drove in `lane`, including the end of
/// the ending lane as a stopped obstacle.
pub fn lane_acceleration(w: &WorldState, i: usize, lane: LaneId, idm: &IdmParams) -> f64 {
    let me = &w.agents[i];
    let mut a = leader_acceleration(w, i, lane, idm);
    if lane == ENDING_LANE {
        let gap = w.map.s_merge() - me.s - me.half_length();
        a = a.min(idm_acceleration(me.v, Some(gap), me.v, idm));
    }
    a
}

/// Parameters used to predict a follower's reaction. A vehicle already
/// faster than the model's desired speed is assumed to want to keep its
/// speed, so its prediction is not dominated by the free-road term.
fn follower_model(v: f64, idm: &IdmParams) -> IdmParams {
    idm.with_desired_velocity(idm.desired_velocity.max(v))
}

fn adjacent(lane: LaneId) -> LaneId {
    1 - lane
}

/// Gap filter on top of MOBIL: enough room ahead and behind in the target
/// lane, and the target-lane follower is at least `time_gap` seconds away.
pub fn lane_change_admissible(
    w: &WorldState,
    i: usize,
    target: LaneId,
    filter: &LaneFilterParams,
) -> bool {
    if let Some(front) = w.leader(i, target) {
        if front.gap < filter.min_front_distance {
            return false;
        }
    }
    if let Some(rear) = w.follower(i, target) {
        if rear.gap < filter.min_rear_distance {
            return false;
        }
        let v_rear = w.agents[rear.index].v;
        if v_rear > 0.0 && rear.gap / v_rear < filter.time_gap {
            return false;
        }
    }
    true
}

/// Incentive of agent `i` for moving to `target`, or `None` when the move
/// would make the new follower brake harder than `safe_deceleration`.
pub fn mobil_incentive(
    w: &WorldState,
    i: usize,
    target: LaneId,
    idm: &IdmParams,
    mobil: &MobilParams,
) -> Option<f64> {
    let me = &w.agents[i];
    let a_c = lane_acceleration(w, i, me.lane, idm);
    let a_c_new = lane_acceleration(w, i, target, idm);

    let mut others_gain = 0.0;
    if let Some(n) = w.follower(i, target) {
        let f = &w.agents[n.index];
        let model = follower_model(f.v, idm);
        let before = lane_acceleration(w, n.index, target, &model);
        let after = before.min(idm_acceleration(f.v, Some(n.gap), f.v - me.v, &model));
        if after < -mobil.safe_deceleration {
            return None;
        }
        others_gain += after - before;
    }
    if let Some(o) = w.follower(i, me.lane) {
        let f = &w.agents[o.index];
        let model = follower_model(f.v, idm);
        let before = idm_acceleration(f.v, Some(o.gap), f.v - me.v, &model);
        let after = match w.leader(i, me.lane) {
            Some(l) => {
                let gap = o.gap + me.footprint.length + l.gap;
                idm_acceleration(f.v, Some(gap), f.v - w.agents[l.index].v, &model)
            }
            None => idm_acceleration(f.v, None, 0.0, &model),
        };
        others_gain += after - before;
    }
    Some(a_c_new - a_c + mobil.politeness * others_gain)
}

/// Lane decision for agent `i`. Ties and sub-threshold gains keep the lane.
pub fn mobil_lane_decision(
    w: &WorldState,
    i: usize,
    idm: &IdmParams,
    mobil: &MobilParams,
    filter: &LaneFilterParams,
) -> LaneCommand {
    let me = &w.agents[i];
    if me.is_changing() {
        return LaneCommand::Keep;
    }
    let target = adjacent(me.lane);
    if !w.map.lane_exists_at(target, me.s) || !lane_change_admissible(w, i, target, filter) {
        return LaneCommand::Keep;
    }
    match mobil_incentive(w, i, target, idm, mobil) {
        Some(gain) if gain > mobil.acceleration_threshold => LaneCommand::ChangeTo(target),
        _ => LaneCommand::Keep,
    }
}
