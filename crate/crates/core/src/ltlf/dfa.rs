//! Deterministic finite automata compiled from formulas by progression.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use super::formula::{Atom, Formula};
use super::parser::{check_obligation, ParseError};
use super::progress::{accepts_empty, progress};

/// Index of an automaton state.
pub type StateId = u32;

/// A symbol is a bitmask over the automaton's proposition list: bit `i` is
/// set iff `props[i]` holds.
pub type Symbol = u64;

/// Largest proposition count accepted by [`compile_dfa`].
pub const MAX_PROPS: usize = 6;

/// Propositions above which transitions are evaluated from guards rather
/// than a dense lookup table.
pub const DENSE_TABLE_MAX_PROPS: usize = 4;

const MAX_STATES: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("formula uses {count} propositions; at most {MAX_PROPS} are supported")]
    PropositionBudget { count: usize },
    #[error("proposition `{0}` does not appear in the alphabet")]
    MissingProposition(String),
    #[error("automaton exceeds {MAX_STATES} states")]
    StateBudget,
    #[error(transparent)]
    Fragment(#[from] ParseError),
}

/// Conjunction of literals: a symbol matches iff `symbol & care == value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub care: Symbol,
    pub value: Symbol,
}

impl Cube {
    pub fn matches(&self, symbol: Symbol) -> bool {
        symbol & self.care == self.value
    }
}

/// Disjunction of cubes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub cubes: Vec<Cube>,
}

impl Guard {
    pub fn matches(&self, symbol: Symbol) -> bool {
        self.cubes.iter().any(|c| c.matches(symbol))
    }

    /// Exact cover of `minterms` obtained by repeatedly merging cubes that
    /// differ in a single cared-for bit.
    fn from_minterms(minterms: &[Symbol], full: Symbol) -> Guard {
        let mut cubes: BTreeSet<Cube> = minterms
            .iter()
            .map(|&m| Cube {
                care: full,
                value: m,
            })
            .collect();
        loop {
            let list: Vec<Cube> = cubes.iter().copied().collect();
            let mut merged = BTreeSet::new();
            let mut used = vec![false; list.len()];
            for i in 0..list.len() {
                for j in (i + 1)..list.len() {
                    let (a, b) = (list[i], list[j]);
                    if a.care != b.care {
                        continue;
                    }
                    let diff = a.value ^ b.value;
                    if diff.count_ones() == 1 {
                        merged.insert(Cube {
                            care: a.care & !diff,
                            value: a.value & !diff,
                        });
                        used[i] = true;
                        used[j] = true;
                    }
                }
            }
            if merged.is_empty() {
                break;
            }
            for (i, c) in list.iter().enumerate() {
                if !used[i] {
                    merged.insert(*c);
                }
            }
            cubes = merged;
        }
        Guard {
            cubes: cubes.into_iter().collect(),
        }
    }

    fn render(&self, props: &[Atom]) -> String {
        if self.cubes.iter().any(|c| c.care == 0) {
            return "true".into();
        }
        let parts: Vec<String> = self
            .cubes
            .iter()
            .map(|c| {
                let lits: Vec<String> = (0..props.len())
                    .filter(|i| c.care >> i & 1 == 1)
                    .map(|i| {
                        if c.value >> i & 1 == 1 {
                            props[i].to_string()
                        } else {
                            format!("!{}", props[i])
                        }
                    })
                    .collect();
                lits.join(" & ")
            })
            .collect();
        parts.join(" | ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub guard: Guard,
    pub target: StateId,
}

/// Deterministic, total automaton over `2^props`.
///
/// Each state corresponds to a canonical residual formula. States from which
/// no accepting state is reachable are collapsed into a single rejecting
/// trap labeled `false`.
#[derive(Debug, Clone)]
pub struct Dfa {
    props: Vec<Atom>,
    initial: StateId,
    residuals: Vec<Formula>,
    accepting: Vec<bool>,
    trap: Vec<bool>,
    edges: Vec<Vec<Edge>>,
    table: Option<Vec<StateId>>,
    canonical_accepting: Option<StateId>,
}

impl Dfa {
    pub fn props(&self) -> &[Atom] {
        &self.props
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.residuals.len()
    }

    pub fn residual(&self, q: StateId) -> &Formula {
        &self.residuals[q as usize]
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q as usize]
    }

    /// A state is a trap iff every symbol maps it to itself.
    pub fn is_trap(&self, q: StateId) -> bool {
        self.trap[q as usize]
    }

    pub fn is_rejecting_trap(&self, q: StateId) -> bool {
        self.trap[q as usize] && !self.accepting[q as usize]
    }

    pub fn edges(&self, q: StateId) -> &[Edge] {
        &self.edges[q as usize]
    }

    /// Accepting state used when a freshly reset automaton sees the end of
    /// its trace: the initial state when it accepts, otherwise the
    /// lowest-numbered accepting state.
    pub fn canonical_accepting(&self) -> Option<StateId> {
        self.canonical_accepting
    }

    pub fn num_symbols(&self) -> usize {
        1 << self.props.len()
    }

    pub fn step(&self, q: StateId, symbol: Symbol) -> StateId {
        match &self.table {
            Some(table) => table[(q as usize) << self.props.len() | symbol as usize],
            None => self.edges[q as usize]
                .iter()
                .find(|e| e.guard.matches(symbol))
                .map(|e| e.target)
                .expect("transition guards are exhaustive"),
        }
    }

    /// Runs the automaton from its initial state.
    pub fn run(&self, word: &[Symbol]) -> StateId {
        word.iter().fold(self.initial, |q, &s| self.step(q, s))
    }

    pub fn accepts(&self, word: &[Symbol]) -> bool {
        self.is_accepting(self.run(word))
    }

    /// Encodes a proposition valuation as a symbol.
    pub fn symbol_of(&self, holds: impl Fn(&Atom) -> bool) -> Symbol {
        self.props
            .iter()
            .enumerate()
            .filter(|(_, a)| holds(a))
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// Exhaustively verifies determinism, totality, reachability and the
    /// consistency of trap flags. Returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.num_states();
        for q in 0..n as StateId {
            for s in 0..self.num_symbols() as Symbol {
                let hits: Vec<StateId> = self
                    .edges(q)
                    .iter()
                    .filter(|e| e.guard.matches(s))
                    .map(|e| e.target)
                    .collect();
                if hits.len() != 1 {
                    return Err(format!(
                        "state {q}, symbol {s:#b}: {} matching edges",
                        hits.len()
                    ));
                }
                if self.step(q, s) != hits[0] {
                    return Err(format!(
                        "state {q}, symbol {s:#b}: table disagrees with guards"
                    ));
                }
            }
            let loops = (0..self.num_symbols() as Symbol).all(|s| self.step(q, s) == q);
            if loops != self.is_trap(q) {
                return Err(format!("state {q}: trap flag inconsistent"));
            }
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial as usize] = true;
        while let Some(q) = queue.pop_front() {
            for e in self.edges(q) {
                if !seen[e.target as usize] {
                    seen[e.target as usize] = true;
                    queue.push_back(e.target);
                }
            }
        }
        if let Some(q) = seen.iter().position(|s| !s) {
            return Err(format!("state {q} unreachable"));
        }
        Ok(())
    }
}

impl fmt::Display for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let props: Vec<String> = self.props.iter().map(Atom::to_string).collect();
        writeln!(f, "props: [{}]", props.join(", "))?;
        for q in 0..self.num_states() as StateId {
            let mark = match (q == self.initial, self.is_accepting(q)) {
                (true, true) => "->*",
                (true, false) => "-> ",
                (false, true) => "  *",
                (false, false) => "   ",
            };
            writeln!(f, "{mark} q{q}: {}", self.residual(q))?;
            for e in self.edges(q) {
                writeln!(
                    f,
                    "      [{}] -> q{}",
                    e.guard.render(&self.props),
                    e.target
                )?;
            }
        }
        Ok(())
    }
}

/// Compiles `f` into a DFA over `props` by breadth-first exploration of its
/// progression residuals.
pub fn compile_dfa(f: &Formula, props: &[Atom]) -> Result<Dfa, CompileError> {
    if props.len() > MAX_PROPS {
        return Err(CompileError::PropositionBudget { count: props.len() });
    }
    let root = f.canonicalize();
    for a in root.atoms() {
        if !props.contains(&a) {
            return Err(CompileError::MissingProposition(a.to_string()));
        }
    }
    let nsym = 1usize << props.len();

    // Explore residuals.
    let mut residuals = vec![root.clone()];
    let mut index: HashMap<Formula, usize> = HashMap::from([(root, 0)]);
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < residuals.len() {
        let mut row = Vec::with_capacity(nsym);
        for s in 0..nsym {
            let holds = |a: &Atom| {
                let k = props.iter().position(|p| p == a).expect("atom in alphabet");
                s >> k & 1 == 1
            };
            let r = progress(&residuals[i], &holds);
            let id = match index.get(&r) {
                Some(&id) => id,
                None => {
                    if residuals.len() >= MAX_STATES {
                        return Err(CompileError::StateBudget);
                    }
                    index.insert(r.clone(), residuals.len());
                    residuals.push(r);
                    residuals.len() - 1
                }
            };
            row.push(id);
        }
        succ.push(row);
        i += 1;
    }
    let accepting: Vec<bool> = residuals.iter().map(accepts_empty).collect();

    // Live states can still reach acceptance; the rest collapse into one trap.
    let n = residuals.len();
    let mut live = accepting.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for q in 0..n {
            if !live[q] && succ[q].iter().any(|&t| live[t]) {
                live[q] = true;
                changed = true;
            }
        }
    }

    // Renumber in breadth-first order from the initial state.
    const DEAD: usize = usize::MAX;
    let rep = |q: usize| if live[q] { q } else { DEAD };
    let mut new_id: HashMap<usize, StateId> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([rep(0)]);
    new_id.insert(rep(0), 0);
    order.push(rep(0));
    while let Some(q) = queue.pop_front() {
        if q == DEAD {
            continue;
        }
        for &t in &succ[q] {
            let t = rep(t);
            if let Entry::Vacant(e) = new_id.entry(t) {
                e.insert(order.len() as StateId);
                order.push(t);
                queue.push_back(t);
            }
        }
    }

    let mut out_residuals = Vec::with_capacity(order.len());
    let mut out_accepting = Vec::with_capacity(order.len());
    let mut rows: Vec<Vec<StateId>> = Vec::with_capacity(order.len());
    for &q in &order {
        if q == DEAD {
            out_residuals.push(Formula::False);
            out_accepting.push(false);
            rows.push(vec![new_id[&DEAD]; nsym]);
        } else {
            out_residuals.push(residuals[q].clone());
            out_accepting.push(accepting[q]);
            rows.push(succ[q].iter().map(|&t| new_id[&rep(t)]).collect());
        }
    }

    let full: Symbol = if props.is_empty() {
        0
    } else {
        (1u64 << props.len()) - 1
    };
    let mut edges = Vec::with_capacity(rows.len());
    let mut trap = Vec::with_capacity(rows.len());
    for (q, row) in rows.iter().enumerate() {
        trap.push(row.iter().all(|&t| t as usize == q));
        let mut targets: Vec<StateId> = row.clone();
        targets.sort_unstable();
        targets.dedup();
        let state_edges = targets
            .into_iter()
            .map(|t| {
                let minterms: Vec<Symbol> = (0..nsym as Symbol)
                    .filter(|&s| row[s as usize] == t)
                    .collect();
                Edge {
                    guard: Guard::from_minterms(&minterms, full),
                    target: t,
                }
            })
            .collect();
        edges.push(state_edges);
    }

    let table = (props.len() <= DENSE_TABLE_MAX_PROPS).then(|| rows.concat());
    let canonical_accepting = if out_accepting[0] {
        Some(0)
    } else {
        out_accepting.iter().position(|&a| a).map(|q| q as StateId)
    };

    Ok(Dfa {
        props: props.to_vec(),
        initial: 0,
        residuals: out_residuals,
        accepting: out_accepting,
        trap,
        edges,
        table,
        canonical_accepting,
    })
}

/// Compiles a rule formula over exactly its own atoms after checking it is an
/// obligation formula.
pub fn compile_rule(f: &Formula) -> Result<Dfa, CompileError> {
    let f = f.canonicalize();
    check_obligation(&f)?;
    compile_dfa(&f, &f.atoms())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltlf::parser::parse_formula;

    fn dfa(text: &str) -> Dfa {
        let f = parse_formula(text).unwrap();
        compile_dfa(&f, &f.atoms()).unwrap()
    }

    #[test]
    fn safety_automaton_shape() {
        let d = dfa("G p");
        assert_eq!(d.num_states(), 2);
        assert!(d.is_accepting(0));
        assert_eq!(d.step(0, 1), 0);
        let trap = d.step(0, 0);
        assert_ne!(trap, 0);
        assert!(d.is_rejecting_trap(trap));
        d.check_invariants().unwrap();
    }

    #[test]
    fn guarantee_automaton_shape() {
        let d = dfa("F p");
        assert_eq!(d.num_states(), 2);
        assert!(!d.is_accepting(0));
        assert_eq!(d.step(0, 0), 0);
        let sink = d.step(0, 1);
        assert!(d.is_accepting(sink));
        assert!(d.is_trap(sink));
        d.check_invariants().unwrap();
    }

    #[test]
    fn unsatisfiable_collapses_to_trap() {
        // Strong next can never hold at the last position.
        // Only the empty trace satisfies it; every symbol is a violation.
        let d = dfa("G X p");
        assert_eq!(d.num_states(), 2);
        assert!(d.is_accepting(0));
        assert!(d.is_rejecting_trap(d.step(0, 0)));
        assert!(d.is_rejecting_trap(d.step(0, 1)));
    }

    #[test]
    fn budget_and_alphabet_errors() {
        let f = parse_formula("G (a & b & c & d & e & f & g)").unwrap();
        assert!(matches!(
            compile_dfa(&f, &f.atoms()),
            Err(CompileError::PropositionBudget { count: 7 })
        ));
        let g = parse_formula("G a").unwrap();
        assert!(matches!(
            compile_dfa(&g, &[]),
            Err(CompileError::MissingProposition(_))
        ));
        assert!(matches!(
            compile_rule(&parse_formula("a U b").unwrap()),
            Err(CompileError::Fragment(_))
        ));
    }

    #[test]
    fn guards_are_evaluated_for_large_alphabets() {
        let d = dfa("G (a | b | c | d | X e)");
        assert!(d.table.is_none());
        d.check_invariants().unwrap();
    }

    #[test]
    fn display_lists_states() {
        let text = dfa("G p").to_string();
        assert!(text.contains("->* q0: G p"), "{text}");
        assert!(text.contains("[!p] -> q1"), "{text}");
    }
}
