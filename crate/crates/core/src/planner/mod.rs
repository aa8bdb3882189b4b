//! Rule-aware Monte Carlo Tree Search over the combined world/automaton
//! state.

pub mod config;
pub mod mcts;
pub mod reward;
pub mod tlo;
pub mod traffic;

pub use config::{ConfigError, PlannerConfig, RewardWeights, RolloutPolicy, Thresholds};
pub use mcts::{
    plan, rollout, uct_select, ActionStats, Mcts, MctsParams, Outcome, PlanError, PlanResult,
    SearchProblem,
};
pub use reward::{Component, RewardVector, StepRewards, Variant, MAX_REWARD_DIMS};
pub use tlo::{
    lexicographic, maximal_set, strictly_better, tlo_compare, tlo_leq, tlo_leq_unrestricted,
    DimensionMismatch, TloOrdering,
};
pub use traffic::{
    plan_action, CombinedState, MonitorBank, MonitorState, SetupError, TrafficModel,
    TrafficProblem, Transition,
};
