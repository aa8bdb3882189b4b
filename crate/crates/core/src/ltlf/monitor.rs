//! Weighted runtime monitors with reset-on-violation semantics.
//!
//! Penalties are reported as rewards: a violation yields `-weight`, every
//! other step yields `0.0`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::dfa::{compile_rule, CompileError, Dfa, StateId, Symbol};
use super::formula::{AgentId, Atom, Formula, Slot};

/// Obligation class of a rule, derived from its top-level operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    /// `G p`: charged every time the automaton is trapped, then reset.
    Safety,
    /// `F p`: charged at most once, when the trace ends unsatisfied.
    Guarantee,
}

/// Anything that decides grounded propositions for one trace step.
pub trait Valuation {
    fn holds(&self, atom: &Atom) -> bool;
}

/// Grounded propositions that hold at one trace step, plus the `alive` flag
/// that is cleared on the last step of a trace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct LabelSet {
    pub props: BTreeSet<Atom>,
    pub alive: bool,
}

impl LabelSet {
    pub fn new(alive: bool) -> Self {
        LabelSet {
            props: BTreeSet::new(),
            alive,
        }
    }

    pub fn with(mut self, atom: Atom) -> Self {
        self.props.insert(atom);
        self
    }

    pub fn insert(&mut self, atom: Atom) {
        self.props.insert(atom);
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.props.contains(atom)
    }
}

impl Valuation for LabelSet {
    fn holds(&self, atom: &Atom) -> bool {
        self.props.contains(atom)
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = self.props.iter().map(Atom::to_string).collect();
        if self.alive {
            items.push("alive".into());
        }
        write!(f, "{{{}}}", items.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("proposition `{0}` has an unresolved agent slot")]
    UnresolvedSlot(String),
    #[error("rule uses more than one agent placeholder: {0:?}")]
    MultipleSlots(Vec<String>),
    #[error("weight must be a finite non-negative number, got {0}")]
    BadWeight(f64),
}

/// A rule compiled once and shared by all of its instances.
#[derive(Debug)]
pub struct RuleTemplate {
    pub name: String,
    pub formula: Formula,
    pub kind: RuleKind,
    /// Placeholder name if the rule is parameterized by another agent.
    pub slot: Option<String>,
    pub dfa: Dfa,
}

impl RuleTemplate {
    pub fn compile(name: impl Into<String>, formula: &Formula) -> Result<Arc<Self>, RuleError> {
        let formula = formula.canonicalize();
        let dfa = compile_rule(&formula)?;
        let kind = match formula {
            Formula::Finally(_) => RuleKind::Guarantee,
            _ => RuleKind::Safety,
        };
        let mut vars: Vec<String> = formula
            .atoms()
            .into_iter()
            .filter_map(|a| match a.slot {
                Some(Slot::Var(v)) => Some(v),
                _ => None,
            })
            .collect();
        vars.sort();
        vars.dedup();
        if vars.len() > 1 {
            return Err(RuleError::MultipleSlots(vars));
        }
        Ok(Arc::new(RuleTemplate {
            name: name.into(),
            formula,
            kind,
            slot: vars.pop(),
            dfa,
        }))
    }

    pub fn is_per_agent(&self) -> bool {
        self.slot.is_some()
    }
}

/// Outcome of one monitored step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: StateId,
    /// `0.0` or `-weight`.
    pub reward: f64,
}

/// Applies the reset-on-violation transition and the weighting function.
///
/// * Safety: entering a rejecting trap charges `weight` and returns to the
///   initial state. A freshly reset automaton that sees the end of the trace
///   moves to the canonical accepting state.
/// * Guarantee: charged once when the trace ends (`alive` false) outside an
///   accepting state; never reset.
pub fn reset_step(
    dfa: &Dfa,
    kind: RuleKind,
    weight: f64,
    q: StateId,
    symbol: Symbol,
    alive: bool,
) -> StepOutcome {
    let next = dfa.step(q, symbol);
    match kind {
        RuleKind::Safety => {
            if dfa.is_rejecting_trap(next) {
                StepOutcome {
                    state: dfa.initial(),
                    reward: -weight,
                }
            } else if !alive && q == dfa.initial() {
                StepOutcome {
                    state: dfa.canonical_accepting().unwrap_or(next),
                    reward: 0.0,
                }
            } else {
                StepOutcome {
                    state: next,
                    reward: 0.0,
                }
            }
        }
        RuleKind::Guarantee => {
            let reward = if !alive && !dfa.is_accepting(next) {
                -weight
            } else {
                0.0
            };
            StepOutcome {
                state: next,
                reward,
            }
        }
    }
}

/// One rule instance bound to a specific other agent (or to none).
#[derive(Debug, Clone)]
pub struct RuleMonitor {
    template: Arc<RuleTemplate>,
    ground: Vec<Atom>,
    state: StateId,
    finished: bool,
    pub weight: f64,
    pub priority: usize,
    pub binding: Option<AgentId>,
}

impl RuleMonitor {
    /// Instantiates `template` in its initial state. `binding` resolves the
    /// template's agent placeholder.
    pub fn instantiate(
        template: &Arc<RuleTemplate>,
        weight: f64,
        priority: usize,
        binding: Option<AgentId>,
    ) -> Result<Self, RuleError> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(RuleError::BadWeight(weight));
        }
        let ground = template
            .dfa
            .props()
            .iter()
            .map(|a| match (&a.slot, binding) {
                (Some(Slot::Var(_)), Some(agent)) => Ok(a.bind(agent)),
                (Some(Slot::Var(_)), None) => Err(RuleError::UnresolvedSlot(a.to_string())),
                _ => Ok(a.clone()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RuleMonitor {
            template: Arc::clone(template),
            ground,
            state: template.dfa.initial(),
            finished: false,
            weight,
            priority,
            binding,
        })
    }

    pub fn template(&self) -> &Arc<RuleTemplate> {
        &self.template
    }

    pub fn dfa(&self) -> &Dfa {
        &self.template.dfa
    }

    pub fn kind(&self) -> RuleKind {
        self.template.kind
    }

    pub fn state(&self) -> StateId {
        self.state
    }

    /// Overrides the automaton state, e.g. when restoring a search node.
    pub fn set_state(&mut self, q: StateId) {
        assert!(
            (q as usize) < self.dfa().num_states(),
            "state {q} out of range"
        );
        self.state = q;
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Grounded propositions in alphabet order.
    pub fn ground_props(&self) -> &[Atom] {
        &self.ground
    }

    pub fn symbol_of(&self, labels: &impl Valuation) -> Symbol {
        self.ground
            .iter()
            .enumerate()
            .filter(|(_, a)| labels.holds(a))
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// Advances on one symbol; returns the reward (`0.0` or `-weight`).
    /// A monitor that has seen its final step ignores further input.
    pub fn step_symbol(&mut self, symbol: Symbol, alive: bool) -> f64 {
        if self.finished {
            return 0.0;
        }
        let out = reset_step(
            self.dfa(),
            self.kind(),
            self.weight,
            self.state,
            symbol,
            alive,
        );
        self.state = out.state;
        if !alive {
            self.finished = true;
        }
        out.reward
    }

    pub fn step(&mut self, labels: &LabelSet) -> f64 {
        let symbol = self.symbol_of(labels);
        self.step_symbol(symbol, labels.alive)
    }
}
