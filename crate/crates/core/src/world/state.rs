//! Joint world state and synchronous stepping.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::agent::{step_agent, AgentId, AgentState, Command, CommandError, KinematicParams};
use super::collision::check_collision;
use super::labels::SafeDistanceParams;
use super::map::{LaneId, MergingMap, CONTINUING_LANE};

/// Longitudinal goal interval on the continuing lane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Goal {
    pub s_min: f64,
    pub s_max: f64,
}

impl Goal {
    pub fn contains(&self, agent: &AgentState) -> bool {
        agent.lane == CONTINUING_LANE
            && agent.change.is_none()
            && agent.s >= self.s_min
            && agent.s <= self.s_max
    }
}

/// A neighbouring vehicle together with the bumper-to-bumper gap to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub map: Arc<MergingMap>,
    pub agents: Vec<AgentState>,
    pub ego: AgentId,
    pub goal: Goal,
    pub t: f64,
    pub dt: f64,
    pub kinematics: KinematicParams,
    pub safe_distance: SafeDistanceParams,
    /// Set once the ego has driven into the end of the ending lane.
    pub ego_off_road: bool,
}

impl WorldState {
    pub fn index_of(&self, id: AgentId) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentState> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn ego_index(&self) -> usize {
        self.index_of(self.ego).expect("ego is present")
    }

    pub fn ego_state(&self) -> &AgentState {
        &self.agents[self.ego_index()]
    }

    pub fn others(&self) -> impl Iterator<Item = &AgentState> {
        let ego = self.ego;
        self.agents.iter().filter(move |a| a.id != ego)
    }

    /// `(s, id)` orders vehicles along the corridor without ties.
    fn is_behind(a: &AgentState, b: &AgentState) -> bool {
        (a.s, a.id) < (b.s, b.id)
    }

    /// Nearest vehicle ahead of agent `i` that occupies `lane`.
    pub fn leader(&self, i: usize, lane: LaneId) -> Option<Neighbor> {
        let me = &self.agents[i];
        self.agents
            .iter()
            .enumerate()
            .filter(|(j, o)| *j != i && o.occupies(lane) && Self::is_behind(me, o))
            .min_by(|(_, x), (_, y)| (x.s, x.id).partial_cmp(&(y.s, y.id)).unwrap())
            .map(|(j, o)| Neighbor {
                index: j,
                gap: o.s - me.s - me.half_length() - o.half_length(),
            })
    }

    /// Nearest vehicle behind agent `i` that occupies `lane`.
    pub fn follower(&self, i: usize, lane: LaneId) -> Option<Neighbor> {
        let me = &self.agents[i];
        self.agents
            .iter()
            .enumerate()
            .filter(|(j, o)| *j != i && o.occupies(lane) && Self::is_behind(o, me))
            .max_by(|(_, x), (_, y)| (x.s, x.id).partial_cmp(&(y.s, y.id)).unwrap())
            .map(|(j, o)| Neighbor {
                index: j,
                gap: me.s - o.s - me.half_length() - o.half_length(),
            })
    }

    /// Whether the ego's footprint overlaps another vehicle, or it has run
    /// off the end of its lane.
    pub fn ego_collides(&self) -> bool {
        if self.ego_off_road {
            return true;
        }
        let ego = self.ego_state();
        self.others().any(|o| check_collision(ego, o, &self.map))
    }

    pub fn ego_at_goal(&self) -> bool {
        self.goal.contains(self.ego_state())
    }

    /// Moves every agent by one step. `commands[i]` drives `agents[i]`.
    /// Agents that leave the corridor are kept; see [`WorldState::departed`].
    pub fn advance(&self, commands: &[Command]) -> Result<WorldState, CommandError> {
        assert_eq!(commands.len(), self.agents.len(), "one command per agent");
        let mut agents = Vec::with_capacity(self.agents.len());
        let mut off_road = self.ego_off_road;
        for (a, cmd) in self.agents.iter().zip(commands) {
            let moved = step_agent(a, *cmd, self.dt, &self.map, &self.kinematics)?;
            if moved.hit_lane_end && a.id == self.ego {
                off_road = true;
            }
            agents.push(moved.agent);
        }
        Ok(WorldState {
            map: Arc::clone(&self.map),
            agents,
            ego: self.ego,
            goal: self.goal,
            t: self.t + self.dt,
            dt: self.dt,
            kinematics: self.kinematics,
            safe_distance: self.safe_distance,
            ego_off_road: off_road,
        })
    }

    /// Other agents whose rear bumper has passed the corridor end.
    pub fn departed(&self) -> Vec<AgentId> {
        let end = self.map.length();
        self.others()
            .filter(|a| a.s - a.half_length() > end)
            .map(|a| a.id)
            .collect()
    }

    pub fn remove(&mut self, ids: &[AgentId]) {
        self.agents.retain(|a| !ids.contains(&a.id));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::agent::Footprint;
    use crate::world::map::ENDING_LANE;

    fn world(agents: Vec<AgentState>) -> WorldState {
        WorldState {
            map: Arc::new(MergingMap::default()),
            agents,
            ego: 0,
            goal: Goal {
                s_min: 190.0,
                s_max: 215.0,
            },
            t: 0.0,
            dt: 0.5,
            kinematics: KinematicParams::default(),
            safe_distance: SafeDistanceParams::default(),
            ego_off_road: false,
        }
    }

    #[test]
    fn leader_and_follower_gaps() {
        let fp = Footprint::default();
        let w = world(vec![
            AgentState::on_lane(0, 0, 50.0, 10.0, fp),
            AgentState::on_lane(1, 0, 70.0, 10.0, fp),
            AgentState::on_lane(2, 1, 60.0, 10.0, fp),
            AgentState::on_lane(3, 0, 30.0, 10.0, fp),
        ]);
        let l = w.leader(0, 0).unwrap();
        assert_eq!((l.index, l.gap), (1, 15.5));
        assert_eq!(w.leader(0, ENDING_LANE).unwrap().index, 2);
        assert_eq!(w.follower(0, 0).unwrap().index, 3);
        assert!(w.follower(0, ENDING_LANE).is_none());
    }

    #[test]
    fn departed_agents_are_reported() {
        let fp = Footprint::default();
        let mut w = world(vec![
            AgentState::on_lane(0, 0, 50.0, 10.0, fp),
            AgentState::on_lane(1, 0, 223.0, 10.0, fp),
        ]);
        assert_eq!(w.departed(), vec![1]);
        w.remove(&[1]);
        assert_eq!(w.agents.len(), 1);
    }
}
