//! Finite-trace temporal logic: parsing, progression, automaton compilation
//! and weighted runtime monitoring.

pub mod dfa;
pub mod formula;
pub mod monitor;
pub mod parser;
pub mod progress;
pub mod rules;

pub use dfa::{compile_dfa, compile_rule, CompileError, Dfa, StateId, Symbol};
pub use formula::{AgentId, Atom, Formula, Slot};
pub use monitor::{
    reset_step, LabelSet, RuleError, RuleKind, RuleMonitor, RuleTemplate, StepOutcome, Valuation,
};
pub use parser::{parse_formula, parse_ltlf, parse_raw, ParseError};
pub use progress::{accepts_empty, progress, progress_set};
pub use rules::{CompiledRule, RuleFileError, RuleSet, RuleSpec};
