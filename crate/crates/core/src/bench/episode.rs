//! Closed-loop episodes: the planner drives the ego, the behavior model
//! drives everyone else, and a separate set of monitors scores the realized
//! trace.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{Action, BehaviorParams};
use crate::ltlf::{AgentId, CompiledRule, LabelSet, RuleMonitor};
use crate::planner::{
    plan_action, MonitorBank, PlanError, PlannerConfig, SetupError, StepRewards, TrafficModel,
    Variant,
};
use crate::world::{CommandError, KinematicParams, SafeDistanceParams, WorldLabels};

use super::scenario::Scenario;

/// Everything an episode needs besides the scenario and the matrix cell.
#[derive(Debug, Clone)]
pub struct EpisodeSetup {
    pub planner: PlannerConfig,
    pub behavior: BehaviorParams,
    pub kinematics: KinematicParams,
    pub safe_distance: SafeDistanceParams,
    /// Rules shared by planner and evaluator.
    pub rules: Vec<CompiledRule>,
}

impl EpisodeSetup {
    pub fn new(planner: PlannerConfig, behavior: BehaviorParams, rules: Vec<CompiledRule>) -> Self {
        EpisodeSetup {
            planner,
            behavior,
            kinematics: KinematicParams::default(),
            safe_distance: SafeDistanceParams::default(),
            rules,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpisodeOutcome {
    Success,
    Collision,
    Timeout,
}

/// Ego pose and speed after a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoSnapshot {
    pub s: f64,
    pub lane: u8,
    pub lateral: f64,
    pub v: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Simulation time after the step (s).
    pub t: f64,
    pub action: Action,
    pub ego: EgoSnapshot,
    /// Grounded labels of the successor world; `alive` is cleared on the
    /// last step.
    pub labels: LabelSet,
    /// Agents that left the road during this step. Their labels are still
    /// in `labels`; it is their last step.
    pub departed: Vec<AgentId>,
    pub rewards: StepRewards,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    /// Agents that per-agent rules bind to.
    pub others: Vec<AgentId>,
    pub initial_ego: EgoSnapshot,
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub scenario: String,
    pub variant: Variant,
    pub budget: usize,
    pub seed: u64,
    pub outcome: EpisodeOutcome,
    pub steps: usize,
    /// Evaluator penalty count per rule, summed over bindings.
    pub violations: BTreeMap<String, u64>,
    /// Time of each rule's first violation (s).
    pub first_violation: BTreeMap<String, f64>,
    /// Penalty count charged by the planner's own monitors along the
    /// realized path, for the rules the variant uses.
    pub planner_violations: BTreeMap<String, u64>,
    pub invalid_lane_changes: u64,
    pub trace: Trace,
}

impl EpisodeResult {
    pub fn violated(&self, rule: &str) -> bool {
        self.violations.get(rule).copied().unwrap_or(0) > 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("episode result serializes")
    }
}

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("scenario `{scenario}`: {source}")]
    Setup {
        scenario: String,
        source: SetupError,
    },
    #[error("scenario `{scenario}`, variant {variant}, step {step}: planner failed: {source}")]
    Plan {
        scenario: String,
        variant: Variant,
        step: usize,
        source: PlanError,
    },
    #[error("scenario `{scenario}`, step {step}: {source}")]
    Command {
        scenario: String,
        step: usize,
        source: CommandError,
    },
}

/// Evaluator monitors: one per rule and binding, fresh state.
pub struct Evaluator {
    monitors: Vec<(String, RuleMonitor)>,
    counts: BTreeMap<String, u64>,
}

impl Evaluator {
    pub fn new(rules: &[CompiledRule], others: &[AgentId]) -> Result<Self, SetupError> {
        let mut monitors = Vec::new();
        let mut counts = BTreeMap::new();
        for r in rules {
            counts.insert(r.spec.name.clone(), 0);
            let bindings: Vec<Option<AgentId>> = if r.template.is_per_agent() {
                others.iter().map(|&a| Some(a)).collect()
            } else {
                vec![None]
            };
            for b in bindings {
                let m = RuleMonitor::instantiate(&r.template, r.spec.weight, r.spec.priority, b)?;
                monitors.push((r.spec.name.clone(), m));
            }
        }
        Ok(Evaluator { monitors, counts })
    }

    /// Feeds one trace step. Returns the names of the rules violated at it.
    pub fn step(&mut self, labels: &LabelSet, departed: &[AgentId]) -> Vec<String> {
        let mut violated = Vec::new();
        for (name, m) in &mut self.monitors {
            let gone = m.binding.is_some_and(|b| departed.contains(&b));
            let mut l = labels.clone();
            l.alive = labels.alive && !gone;
            if m.step(&l) < 0.0 {
                *self.counts.get_mut(name).expect("rule registered") += 1;
                if !violated.contains(name) {
                    violated.push(name.clone());
                }
            }
        }
        violated
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }
}

/// Violation count per rule (summed over bindings) of a recorded trace.
pub fn evaluate_trace(
    trace: &Trace,
    rules: &[CompiledRule],
) -> Result<BTreeMap<String, u64>, SetupError> {
    let mut ev = Evaluator::new(rules, &trace.others)?;
    for st in &trace.steps {
        ev.step(&st.labels, &st.departed);
    }
    Ok(ev.counts)
}

/// Planning seed for one step of an episode.
pub fn step_seed(seed: u64, step: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(seed ^ mix(step as u64))
}

fn snapshot(w: &crate::world::WorldState) -> EgoSnapshot {
    let e = w.ego_state();
    EgoSnapshot {
        s: e.s,
        lane: e.lane,
        lateral: e.lateral,
        v: e.v,
        a: e.a,
    }
}

/// Runs `sc` with the given variant, iteration budget and seed until the
/// ego reaches the goal, collides or runs out of time.
pub fn run_episode(
    sc: &Scenario,
    setup: &EpisodeSetup,
    variant: Variant,
    budget: usize,
    seed: u64,
) -> Result<EpisodeResult, EpisodeError> {
    let setup_err = |source| EpisodeError::Setup {
        scenario: sc.name.clone(),
        source,
    };
    let others = sc.others();
    let bank =
        Arc::new(MonitorBank::for_variant(variant, &setup.rules, &others).map_err(setup_err)?);
    let mut evaluator = Evaluator::new(&setup.rules, &others).map_err(setup_err)?;
    let config = PlannerConfig {
        variant,
        iterations: budget,
        seed,
        ..setup.planner.clone()
    };
    let model = TrafficModel::new(setup.behavior, config, Arc::clone(&bank));

    let world = sc.initial_world(setup.kinematics, setup.safe_distance);
    let initial_ego = snapshot(&world);
    let mut z = model.root(world, bank.initial_states());
    let max_steps = (sc.time_limit / sc.dt - 1e-9).ceil().max(0.0) as usize;

    let mut steps = Vec::new();
    let mut first_violation = BTreeMap::new();
    let mut planner_violations: BTreeMap<String, u64> = BTreeMap::new();
    for k in 0..bank.len() {
        planner_violations.insert(bank.rule_name(k).to_string(), 0);
    }
    let mut invalid_lane_changes = 0;

    let outcome = if z.terminal {
        // Degenerate start: record the initial labels as a one-step trace.
        let labels = WorldLabels::compute(&z.world);
        let set = labels.to_label_set(None, false);
        for name in evaluator.step(&set, &[]) {
            first_violation.entry(name).or_insert(0.0);
        }
        steps.push(TraceStep {
            t: z.world.t,
            action: Action::Coast,
            ego: initial_ego,
            labels: set,
            departed: Vec::new(),
            rewards: StepRewards::default(),
        });
        if labels.collide {
            EpisodeOutcome::Collision
        } else {
            EpisodeOutcome::Success
        }
    } else {
        let mut outcome = EpisodeOutcome::Timeout;
        for step in 0..max_steps {
            let (action, _) =
                plan_action(&model, z.clone(), step_seed(seed, step)).map_err(|source| {
                    EpisodeError::Plan {
                        scenario: sc.name.clone(),
                        variant,
                        step,
                        source,
                    }
                })?;
            let end = step + 1 == max_steps;
            let tr =
                model
                    .step_combined(&z, action, end)
                    .map_err(|source| EpisodeError::Command {
                        scenario: sc.name.clone(),
                        step,
                        source,
                    })?;
            for (k, p) in tr.penalties.iter().enumerate() {
                if *p < 0.0 {
                    *planner_violations
                        .get_mut(bank.rule_name(k))
                        .expect("registered") += 1;
                }
            }
            invalid_lane_changes += u64::from(tr.invalid_lane_change);
            let last = end || tr.next.terminal;
            let set = tr.labels.to_label_set(None, !last);
            let t = tr.next.world.t;
            for name in evaluator.step(&set, &tr.departed) {
                first_violation.entry(name).or_insert(t);
            }
            steps.push(TraceStep {
                t,
                action,
                ego: snapshot(&tr.next.world),
                labels: set,
                departed: tr.departed.clone(),
                rewards: tr.rewards,
            });
            z = model.root(tr.next.world, tr.next.monitors);
            if tr.collided {
                outcome = EpisodeOutcome::Collision;
                break;
            }
            if tr.at_goal {
                outcome = EpisodeOutcome::Success;
                break;
            }
        }
        outcome
    };

    Ok(EpisodeResult {
        scenario: sc.name.clone(),
        variant,
        budget,
        seed,
        outcome,
        steps: steps.len(),
        violations: evaluator.counts().clone(),
        first_violation,
        planner_violations,
        invalid_lane_changes,
        trace: Trace {
            others,
            initial_ego,
            steps,
        },
    })
}
