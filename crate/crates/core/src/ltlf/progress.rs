//! Formula progression over finite traces.
//!
//! `progress(f, σ)` is the obligation the rest of the trace must satisfy
//! after `σ` has been read; `accepts_empty(f)` decides whether the trace may
//! end now. Together they define the residual automaton that
//! [`compile_dfa`](super::dfa::compile_dfa) materializes.

use super::formula::{self as fm, Atom, Formula};

/// Residual of `f` after one symbol. `holds` decides each proposition.
///
/// Non-canonical input is canonicalized first.
pub fn progress(f: &Formula, holds: &impl Fn(&Atom) -> bool) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom(a) => bool_formula(holds(a)),
        Formula::Not(inner) => match &**inner {
            Formula::Atom(a) => bool_formula(!holds(a)),
            _ => progress(&f.canonicalize(), holds),
        },
        Formula::And(gs) => fm::and(gs.iter().map(|g| progress(g, holds)).collect()),
        Formula::Or(gs) => fm::or(gs.iter().map(|g| progress(g, holds)).collect()),
        Formula::Implies(..) => progress(&f.canonicalize(), holds),
        Formula::Next(g) => {
            // The successor position must exist.
            if accepts_empty(g) {
                fm::and(vec![(**g).clone(), Formula::non_empty()])
            } else {
                (**g).clone()
            }
        }
        Formula::WeakNext(g) => {
            if accepts_empty(g) {
                (**g).clone()
            } else {
                fm::or(vec![(**g).clone(), Formula::empty()])
            }
        }
        Formula::Globally(g) => fm::and(vec![progress(g, holds), f.clone()]),
        Formula::Finally(g) => fm::or(vec![progress(g, holds), f.clone()]),
        Formula::Until(a, b) => fm::or(vec![
            progress(b, holds),
            fm::and(vec![progress(a, holds), f.clone()]),
        ]),
        Formula::Release(a, b) => fm::and(vec![
            progress(b, holds),
            fm::or(vec![progress(a, holds), f.clone()]),
        ]),
    }
}

/// Progression against an explicit set of true propositions.
pub fn progress_set(f: &Formula, symbol: &[Atom]) -> Formula {
    progress(f, &|a: &Atom| symbol.contains(a))
}

/// Whether the empty suffix satisfies `f`.
pub fn accepts_empty(f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(_) | Formula::Not(_) => false,
        Formula::And(gs) => gs.iter().all(accepts_empty),
        Formula::Or(gs) => gs.iter().any(accepts_empty),
        Formula::Implies(..) => accepts_empty(&f.canonicalize()),
        Formula::Next(_) | Formula::Finally(_) | Formula::Until(..) => false,
        Formula::WeakNext(_) | Formula::Globally(_) | Formula::Release(..) => true,
    }
}

fn bool_formula(b: bool) -> Formula {
    if b {
        Formula::True
    } else {
        Formula::False
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltlf::parser::parse_formula;

    fn p(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    fn sym(names: &[&str]) -> Vec<Atom> {
        names.iter().map(|n| Atom::new(*n)).collect()
    }

    #[test]
    fn globally_holds_and_fails() {
        assert_eq!(progress_set(&p("G p"), &sym(&["p"])), p("G p"));
        assert_eq!(progress_set(&p("G p"), &sym(&[])), Formula::False);
    }

    #[test]
    fn until_cases() {
        assert_eq!(progress_set(&p("p U q"), &sym(&["p"])), p("p U q"));
        assert_eq!(progress_set(&p("p U q"), &sym(&["q"])), Formula::True);
        assert_eq!(progress_set(&p("p U q"), &sym(&[])), Formula::False);
    }

    #[test]
    fn empty_suffix_acceptance() {
        assert!(accepts_empty(&p("G p")));
        assert!(!accepts_empty(&p("F p")));
        assert!(!accepts_empty(&p("G p & F q")));
        assert!(!accepts_empty(&p("X p")));
        assert!(accepts_empty(&p("N p")));
    }

    #[test]
    fn strong_next_requires_successor() {
        // X true fails on a single-position trace.
        let r = progress_set(&p("F X true"), &sym(&[]));
        assert!(!accepts_empty(&r));
        let r2 = progress_set(&r, &sym(&[]));
        assert!(accepts_empty(&r2));
    }

    #[test]
    fn weak_next_accepts_at_end() {
        let r = progress_set(&p("N p"), &sym(&[]));
        assert!(accepts_empty(&r));
        assert_eq!(progress_set(&r, &sym(&[])), Formula::False);
        assert_eq!(progress_set(&r, &sym(&["p"])), Formula::True);
    }
}
