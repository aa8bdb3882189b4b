//! The merge world as a search problem: combined world/automaton state,
//! reward assembly and the default rollout policy.

use std::cell::Cell;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::behavior::{joint_commands, primitive_action, Action, BehaviorParams, IdmParams};
use crate::ltlf::{reset_step, AgentId, CompiledRule, RuleError, RuleMonitor, StateId};
use crate::world::{is_known_label, CommandError, WorldLabels, WorldState};

use super::config::{PlannerConfig, RolloutPolicy};
use super::mcts::{plan, MctsParams, Outcome, PlanError, PlanResult, SearchProblem};
use super::reward::{Component, StepRewards, Variant};

#[derive(Debug, Error)]
pub enum SetupError {
    #[error("variant {variant} needs rule `{rule}`, which the rule set does not define")]
    MissingRule {
        variant: Variant,
        rule: &'static str,
    },
    #[error("rule `{rule}` uses proposition `{atom}`, which the world does not label")]
    UnknownLabel { rule: String, atom: String },
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Automaton state of one monitor inside a combined state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MonitorState {
    pub q: StateId,
    /// The monitor has seen its final (`alive`-free) step.
    pub finished: bool,
}

/// Rule monitors for one ego: their compiled automata, weights, bindings
/// and the reward component each one feeds. States live separately in
/// [`CombinedState`].
#[derive(Debug, Clone)]
pub struct MonitorBank {
    pub monitors: Vec<RuleMonitor>,
    pub components: Vec<Component>,
}

impl MonitorBank {
    /// Instantiates every rule used by `variant`: once per other agent for
    /// per-agent rules, once otherwise.
    pub fn for_variant(
        variant: Variant,
        rules: &[CompiledRule],
        others: &[AgentId],
    ) -> Result<Self, SetupError> {
        let mut bank = MonitorBank {
            monitors: Vec::new(),
            components: Vec::new(),
        };
        for comp in variant.layout().iter().flat_map(|d| d.iter()) {
            let Some(name) = comp.rule() else { continue };
            let rule =
                rules
                    .iter()
                    .find(|r| r.spec.name == name)
                    .ok_or(SetupError::MissingRule {
                        variant,
                        rule: name,
                    })?;
            bank.add(rule, *comp, others)?;
        }
        Ok(bank)
    }

    /// Instantiates every rule in `rules`, each feeding `component_of` its
    /// name. Used by the evaluator, which monitors all rules.
    pub fn for_rules(rules: &[CompiledRule], others: &[AgentId]) -> Result<Self, SetupError> {
        let mut bank = MonitorBank {
            monitors: Vec::new(),
            components: Vec::new(),
        };
        for rule in rules {
            let comp = match rule.spec.name.as_str() {
                crate::ltlf::rules::ZIPPER => Component::Zipper,
                crate::ltlf::rules::SAFE_DISTANCE => Component::SafeDistance,
                _ => Component::Base,
            };
            bank.add(rule, comp, others)?;
        }
        Ok(bank)
    }

    fn add(
        &mut self,
        rule: &CompiledRule,
        comp: Component,
        others: &[AgentId],
    ) -> Result<(), SetupError> {
        for atom in rule.template.dfa.props() {
            if !is_known_label(atom) {
                return Err(SetupError::UnknownLabel {
                    rule: rule.spec.name.clone(),
                    atom: atom.to_string(),
                });
            }
        }
        let bindings: Vec<Option<AgentId>> = if rule.template.is_per_agent() {
            others.iter().map(|&a| Some(a)).collect()
        } else {
            vec![None]
        };
        for b in bindings {
            self.monitors.push(RuleMonitor::instantiate(
                &rule.template,
                rule.spec.weight,
                rule.spec.priority,
                b,
            )?);
            self.components.push(comp);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.monitors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monitors.is_empty()
    }

    pub fn initial_states(&self) -> Vec<MonitorState> {
        self.monitors
            .iter()
            .map(|m| MonitorState {
                q: m.dfa().initial(),
                finished: false,
            })
            .collect()
    }

    pub fn rule_name(&self, k: usize) -> &str {
        &self.monitors[k].template().name
    }
}

/// World state plus the automaton state of every monitor and the depth
/// below the search root.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedState {
    pub world: WorldState,
    pub monitors: Vec<MonitorState>,
    pub depth: usize,
    /// Collision or goal reached.
    pub terminal: bool,
}

/// Everything one combined-state transition produced.
#[derive(Debug, Clone)]
pub struct Transition {
    pub next: CombinedState,
    pub rewards: StepRewards,
    /// Labels of the successor world, computed before departed agents are
    /// removed.
    pub labels: WorldLabels,
    /// Reward charged by each monitor (`0` or `-weight`).
    pub penalties: Vec<f64>,
    pub departed: Vec<AgentId>,
    pub invalid_lane_change: bool,
    pub collided: bool,
    pub at_goal: bool,
}

/// Static inputs of the transition function.
#[derive(Debug, Clone)]
pub struct TrafficModel {
    pub behavior: BehaviorParams,
    pub ego_idm: IdmParams,
    pub config: PlannerConfig,
    pub bank: Arc<MonitorBank>,
}

impl TrafficModel {
    pub fn new(behavior: BehaviorParams, config: PlannerConfig, bank: Arc<MonitorBank>) -> Self {
        TrafficModel {
            ego_idm: behavior.ego_idm(),
            behavior,
            config,
            bank,
        }
    }

    pub fn root(&self, world: WorldState, monitors: Vec<MonitorState>) -> CombinedState {
        assert_eq!(monitors.len(), self.bank.len(), "one state per monitor");
        let terminal = world.ego_collides() || world.ego_at_goal();
        CombinedState {
            world,
            monitors,
            depth: 0,
            terminal,
        }
    }

    /// Shaping potential `-w_phi |v - v_r| dt` of the ego's speed.
    pub fn potential(&self, w: &WorldState) -> f64 {
        -self.config.weights.potential
            * (w.ego_state().v - self.config.reference_velocity).abs()
            * w.dt
    }

    /// Applies the ego's `action`, moves the other agents by the behavior
    /// model and steps every monitor on the successor's labels. The step is
    /// the last of its trace when `end_of_trace` is set or the successor is
    /// terminal; monitors of departing agents see their last step too.
    pub fn step_combined(
        &self,
        z: &CombinedState,
        action: Action,
        end_of_trace: bool,
    ) -> Result<Transition, CommandError> {
        let w = &z.world;
        let prim = primitive_action(w, action, &self.ego_idm);
        let commands = joint_commands(w, prim.command, &self.behavior);
        let mut next = w.advance(&commands)?;
        let labels = WorldLabels::compute(&next);
        let collided = labels.collide;
        let at_goal = labels.at_goal && !collided;
        let terminal = collided || at_goal;
        let departed = next.departed();
        let last = end_of_trace || terminal;

        let mut rewards = StepRewards::default();
        let mut penalties = vec![0.0; self.bank.len()];
        let mut monitors = z.monitors.clone();
        for (k, m) in self.bank.monitors.iter().enumerate() {
            let st = &mut monitors[k];
            if st.finished {
                continue;
            }
            let alive = !(last || m.binding.is_some_and(|b| departed.contains(&b)));
            let out = reset_step(
                m.dfa(),
                m.kind(),
                m.weight,
                st.q,
                m.symbol_of(&labels),
                alive,
            );
            st.q = out.state;
            st.finished = !alive;
            penalties[k] = out.reward;
            match self.bank.components[k] {
                Component::Zipper => rewards.zipper += out.reward,
                Component::SafeDistance => rewards.safe_distance += out.reward,
                _ => {}
            }
        }

        let wts = &self.config.weights;
        let ego = next.ego_state();
        let dt = w.dt;
        if collided {
            rewards.collision = -wts.collision;
        }
        rewards.accel = -wts.acceleration * prim.command.accel * prim.command.accel * dt;
        rewards.lateral = -wts.lateral * ego.theta_rate.abs() * ego.v * ego.v * dt;
        rewards.velocity = -wts.velocity * (ego.v - self.config.reference_velocity).abs() * dt;
        rewards.shaping = self.config.discount * self.potential(&next) - self.potential(w);

        next.remove(&departed);
        Ok(Transition {
            next: CombinedState {
                world: next,
                monitors,
                depth: z.depth + 1,
                terminal,
            },
            rewards,
            labels,
            penalties,
            departed,
            invalid_lane_change: prim.invalid_lane_change,
            collided,
            at_goal,
        })
    }
}

/// [`TrafficModel`] with a finite horizon, as seen by the search.
pub struct TrafficProblem<'a> {
    pub model: &'a TrafficModel,
    invalid_lane_changes: Cell<u64>,
}

impl<'a> TrafficProblem<'a> {
    pub fn new(model: &'a TrafficModel) -> Self {
        TrafficProblem {
            model,
            invalid_lane_changes: Cell::new(0),
        }
    }

    /// Lane-change actions that had no adjacent lane, over all searches.
    pub fn invalid_lane_changes(&self) -> u64 {
        self.invalid_lane_changes.get()
    }

    fn horizon(&self) -> usize {
        self.model.config.horizon
    }
}

impl SearchProblem for TrafficProblem<'_> {
    type State = CombinedState;

    fn num_actions(&self) -> usize {
        Action::ALL.len()
    }

    fn dims(&self) -> usize {
        self.model.config.variant.dims()
    }

    fn is_terminal(&self, z: &CombinedState) -> bool {
        z.terminal || z.depth >= self.horizon()
    }

    fn step(&self, z: &CombinedState, action: usize) -> Outcome<CombinedState> {
        let end = z.depth + 1 >= self.horizon();
        let t = self
            .model
            .step_combined(z, Action::ALL[action], end)
            .expect("primitive and behavior commands are always valid");
        if t.invalid_lane_change {
            self.invalid_lane_changes
                .set(self.invalid_lane_changes.get() + 1);
        }
        Outcome {
            reward: t.rewards.assemble(self.model.config.variant),
            terminal: t.next.terminal || end,
            state: t.next,
        }
    }

    fn rollout_action(&self, _z: &CombinedState, rng: &mut ChaCha8Rng) -> usize {
        match self.model.config.rollout {
            RolloutPolicy::GapKeep => Action::GapKeep.index(),
            RolloutPolicy::UniformRandom => rng.gen_range(0..Action::ALL.len()),
            RolloutPolicy::Constant(a) => a.index(),
        }
    }
}

/// Plans one ego action from `root` with the model's configuration.
pub fn plan_action(
    model: &TrafficModel,
    root: CombinedState,
    seed: u64,
) -> Result<(Action, PlanResult), PlanError> {
    let problem = TrafficProblem::new(model);
    let cfg = &model.config;
    let params = MctsParams {
        iterations: cfg.iterations,
        exploration: cfg.exploration,
        discount: cfg.discount,
        thresholds: cfg.threshold_vector(),
        seed,
    };
    let result = plan(&problem, root, params)?;
    Ok((Action::ALL[result.action], result))
}
