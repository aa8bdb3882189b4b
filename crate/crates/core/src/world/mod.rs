//! Merge corridor environment: map, kinematics, collisions and labels.

pub mod agent;
pub mod collision;
pub mod labels;
pub mod map;
pub mod state;

pub use agent::{
    step_agent, AgentState, Command, CommandError, Footprint, KinematicParams, LaneChange,
    LaneCommand, Moved,
};
pub use collision::{check_collision, Obb};
pub use labels::{
    is_known_label, label_world, safe_distance_threshold, AgentLabels, SafeDistanceParams,
    WorldLabels,
};
pub use map::{LaneId, MapParams, MergingMap, Polyline, CONTINUING_LANE, ENDING_LANE};
pub use state::{Goal, Neighbor, WorldState};
