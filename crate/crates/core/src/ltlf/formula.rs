//! Abstract syntax of finite-trace temporal formulas and their canonical form.
//!
//! Canonical formulas are in negation normal form: implications are
//! eliminated, `Not` wraps only atoms, conjunctions and disjunctions are
//! flattened with sorted, deduplicated children, and boolean constants are
//! folded. Two canonical formulas are semantically interchangeable as
//! automaton states whenever they are structurally equal.

use std::fmt;

/// Identifier of a traffic participant.
pub type AgentId = u32;

/// Agent placeholder attached to a proposition, e.g. the `j` in `idf#j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    /// Unresolved placeholder, bound when a rule is instantiated.
    Var(String),
    /// Concrete agent.
    Agent(AgentId),
}

/// Atomic proposition: a label name plus an optional agent slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub name: String,
    pub slot: Option<Slot>,
}

impl Atom {
    pub fn new(name: impl Into<String>) -> Self {
        Atom {
            name: name.into(),
            slot: None,
        }
    }

    pub fn with_var(name: impl Into<String>, var: impl Into<String>) -> Self {
        Atom {
            name: name.into(),
            slot: Some(Slot::Var(var.into())),
        }
    }

    pub fn for_agent(name: impl Into<String>, agent: AgentId) -> Self {
        Atom {
            name: name.into(),
            slot: Some(Slot::Agent(agent)),
        }
    }

    /// True when the atom carries no unresolved placeholder.
    pub fn is_ground(&self) -> bool {
        !matches!(self.slot, Some(Slot::Var(_)))
    }

    /// Replaces a placeholder slot by `agent`. Ground atoms are returned as-is.
    pub fn bind(&self, agent: AgentId) -> Atom {
        match self.slot {
            Some(Slot::Var(_)) => Atom::for_agent(self.name.clone(), agent),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.slot {
            None => write!(f, "{}", self.name),
            Some(Slot::Var(v)) => write!(f, "{}#{}", self.name, v),
            Some(Slot::Agent(a)) => write!(f, "{}#{}", self.name, a),
        }
    }
}

impl serde::Serialize for Atom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Atom {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        match super::parser::parse_raw(&text) {
            Ok(Formula::Atom(a)) => Ok(a),
            _ => Err(serde::de::Error::custom(format!(
                "invalid proposition `{text}`"
            ))),
        }
    }
}

/// Formula over finite traces.
///
/// `Next` is the strong next (a successor position must exist); `WeakNext`
/// holds vacuously at the last position. `WeakNext` and `Release` only arise
/// from pushing negations inward.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    WeakNext(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Globally(Box<Formula>),
    Finally(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(Atom::new(name))
    }

    // Raw constructors: no simplification, used by the parser and tests.

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn weak_next(f: Formula) -> Self {
        Formula::WeakNext(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Formula, b: Formula) -> Self {
        Formula::Release(Box::new(a), Box::new(b))
    }

    pub fn globally(f: Formula) -> Self {
        Formula::Globally(Box::new(f))
    }

    pub fn finally(f: Formula) -> Self {
        Formula::Finally(Box::new(f))
    }

    /// Residual satisfied by every non-empty suffix and rejected by the empty one.
    pub fn non_empty() -> Self {
        Formula::finally(Formula::True)
    }

    /// Residual satisfied only by the empty suffix.
    pub fn empty() -> Self {
        Formula::globally(Formula::False)
    }

    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(inner) => matches!(**inner, Formula::Atom(_)),
            _ => false,
        }
    }

    /// All atoms, sorted and deduplicated.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Atom>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => out.push(a.clone()),
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::WeakNext(f)
            | Formula::Globally(f)
            | Formula::Finally(f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
            Formula::Implies(a, b) | Formula::Until(a, b) | Formula::Release(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Operator nesting depth; atoms and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::WeakNext(f)
            | Formula::Globally(f)
            | Formula::Finally(f) => 1 + f.depth(),
            Formula::And(fs) | Formula::Or(fs) => {
                1 + fs.iter().map(Formula::depth).max().unwrap_or(0)
            }
            Formula::Implies(a, b) | Formula::Until(a, b) | Formula::Release(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Rewrites every atom through `f`.
    pub fn map_atoms(&self, f: &impl Fn(&Atom) -> Atom) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => Formula::Atom(f(a)),
            Formula::Not(g) => Formula::not(g.map_atoms(f)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.map_atoms(f)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.map_atoms(f), b.map_atoms(f)),
            Formula::Next(g) => Formula::next(g.map_atoms(f)),
            Formula::WeakNext(g) => Formula::weak_next(g.map_atoms(f)),
            Formula::Until(a, b) => Formula::until(a.map_atoms(f), b.map_atoms(f)),
            Formula::Release(a, b) => Formula::release(a.map_atoms(f), b.map_atoms(f)),
            Formula::Globally(g) => Formula::globally(g.map_atoms(f)),
            Formula::Finally(g) => Formula::finally(g.map_atoms(f)),
        }
    }

    /// Negation normal form with implications removed and booleans simplified.
    pub fn canonicalize(&self) -> Formula {
        nnf(self, false)
    }

    /// Whether the formula is already canonical.
    pub fn is_canonical(&self) -> bool {
        &self.canonicalize() == self
    }
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match (f, neg) {
        (Formula::True, false) | (Formula::False, true) => Formula::True,
        (Formula::True, true) | (Formula::False, false) => Formula::False,
        (Formula::Atom(a), false) => Formula::Atom(a.clone()),
        (Formula::Atom(a), true) => Formula::not(Formula::Atom(a.clone())),
        (Formula::Not(g), _) => nnf(g, !neg),
        (Formula::And(gs), false) => and(gs.iter().map(|g| nnf(g, false)).collect()),
        (Formula::And(gs), true) => or(gs.iter().map(|g| nnf(g, true)).collect()),
        (Formula::Or(gs), false) => or(gs.iter().map(|g| nnf(g, false)).collect()),
        (Formula::Or(gs), true) => and(gs.iter().map(|g| nnf(g, true)).collect()),
        (Formula::Implies(a, b), false) => or(vec![nnf(a, true), nnf(b, false)]),
        (Formula::Implies(a, b), true) => and(vec![nnf(a, false), nnf(b, true)]),
        (Formula::Next(g), false) => next(nnf(g, false)),
        (Formula::Next(g), true) => weak_next(nnf(g, true)),
        (Formula::WeakNext(g), false) => weak_next(nnf(g, false)),
        (Formula::WeakNext(g), true) => next(nnf(g, true)),
        (Formula::Until(a, b), false) => until(nnf(a, false), nnf(b, false)),
        (Formula::Until(a, b), true) => release(nnf(a, true), nnf(b, true)),
        (Formula::Release(a, b), false) => release(nnf(a, false), nnf(b, false)),
        (Formula::Release(a, b), true) => until(nnf(a, true), nnf(b, true)),
        (Formula::Globally(g), false) => globally(nnf(g, false)),
        (Formula::Globally(g), true) => finally(nnf(g, true)),
        (Formula::Finally(g), false) => finally(nnf(g, false)),
        (Formula::Finally(g), true) => globally(nnf(g, true)),
    }
}

// Simplifying constructors. Every rewrite here must hold on the empty
// suffix as well, since residual formulas are judged there at trace end.

pub(crate) fn and(items: Vec<Formula>) -> Formula {
    let mut flat = Vec::with_capacity(items.len());
    for item in items {
        match item {
            Formula::True => {}
            Formula::False => return Formula::False,
            Formula::And(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    flat.sort();
    flat.dedup();
    // a & !a
    for f in &flat {
        if let Formula::Not(inner) = f {
            if flat.binary_search(&**inner).is_ok() {
                return Formula::False;
            }
        }
    }
    match flat.len() {
        0 => Formula::True,
        1 => flat.pop().unwrap(),
        _ => Formula::And(flat),
    }
}

pub(crate) fn or(items: Vec<Formula>) -> Formula {
    let mut flat = Vec::with_capacity(items.len());
    for item in items {
        match item {
            Formula::False => {}
            Formula::True => return Formula::True,
            Formula::Or(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    flat.sort();
    flat.dedup();
    match flat.len() {
        0 => Formula::False,
        1 => flat.pop().unwrap(),
        _ => Formula::Or(flat),
    }
}

pub(crate) fn next(f: Formula) -> Formula {
    match f {
        Formula::False => Formula::False,
        g => Formula::next(g),
    }
}

pub(crate) fn weak_next(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::True,
        g => Formula::weak_next(g),
    }
}

pub(crate) fn until(a: Formula, b: Formula) -> Formula {
    match b {
        Formula::False => Formula::False,
        b => Formula::until(a, b),
    }
}

pub(crate) fn release(a: Formula, b: Formula) -> Formula {
    match b {
        Formula::True => Formula::True,
        b => Formula::release(a, b),
    }
}

pub(crate) fn globally(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::True,
        g => Formula::globally(g),
    }
}

pub(crate) fn finally(f: Formula) -> Formula {
    match f {
        Formula::False => Formula::False,
        g => Formula::finally(g),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "!{}", Paren(g)),
            Formula::And(gs) => join(f, gs, " & "),
            Formula::Or(gs) => join(f, gs, " | "),
            Formula::Implies(a, b) => write!(f, "({} -> {})", a, b),
            Formula::Next(g) => write!(f, "X {}", Paren(g)),
            Formula::WeakNext(g) => write!(f, "N {}", Paren(g)),
            Formula::Until(a, b) => write!(f, "({} U {})", Paren(a), Paren(b)),
            Formula::Release(a, b) => write!(f, "({} R {})", Paren(a), Paren(b)),
            Formula::Globally(g) => write!(f, "G {}", Paren(g)),
            Formula::Finally(g) => write!(f, "F {}", Paren(g)),
        }
    }
}

/// Prints binary-operator formulas wrapped in parentheses.
struct Paren<'a>(&'a Formula);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Formula::And(_) | Formula::Or(_) => write!(f, "({})", self.0),
            g => write!(f, "{g}"),
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, items: &[Formula], sep: &str) -> fmt::Result {
    for (i, g) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{}", Paren(g))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Formula {
        Formula::atom(n)
    }

    #[test]
    fn nnf_pushes_negation_through_temporal_operators() {
        let f = Formula::not(Formula::globally(Formula::next(a("p"))));
        let expected = Formula::finally(Formula::weak_next(Formula::not(a("p"))));
        assert_eq!(f.canonicalize(), expected);
    }

    #[test]
    fn and_detects_complementary_literals() {
        let f = Formula::And(vec![a("p"), Formula::not(a("p")), a("q")]);
        assert_eq!(f.canonicalize(), Formula::False);
    }

    #[test]
    fn or_keeps_tautology_syntactically() {
        // p | !p is false on the empty suffix, unlike `true`.
        let f = Formula::Or(vec![a("p"), Formula::not(a("p"))]);
        assert!(matches!(f.canonicalize(), Formula::Or(_)));
    }

    #[test]
    fn flatten_and_sort() {
        let f = Formula::And(vec![a("c"), Formula::And(vec![a("b"), a("a")]), a("b")]);
        assert_eq!(f.canonicalize(), Formula::And(vec![a("a"), a("b"), a("c")]));
    }

    #[test]
    fn canonicalize_is_idempotent_on_marker_residuals() {
        let f = Formula::And(vec![Formula::non_empty(), a("p")]);
        let c = f.canonicalize();
        assert_eq!(c.canonicalize(), c);
        assert_eq!(Formula::empty().canonicalize(), Formula::empty());
    }

    #[test]
    fn display_uses_concrete_syntax() {
        let f = Formula::globally(Formula::Or(vec![
            Formula::not(Formula::Atom(Atom::with_var("idf", "j"))),
            Formula::next(Formula::not(Formula::Atom(Atom::for_agent("ahead", 3)))),
        ]));
        assert_eq!(f.to_string(), "G (!idf#j | X !ahead#3)");
    }
}
