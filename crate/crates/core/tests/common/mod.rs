//! Test-side oracles that share no code with the library's progression,
//! automata or search.

#![allow(dead_code)]

pub mod uct;

use std::collections::{HashSet, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rulemcts::ltlf::{Atom, Formula, LabelSet};

pub const ATOMS: [&str; 3] = ["a", "b", "c"];

/// Letter: bit `i` set iff `ATOMS[i]` holds.
pub type Letter = u8;

fn bit(name: &str) -> Letter {
    1 << ATOMS.iter().position(|a| *a == name).expect("oracle atom")
}

/// Direct recursive satisfaction of `f` at position `i` of the finite
/// trace `w` (`i < w.len()`).
pub fn holds(f: &Formula, w: &[Letter], i: usize) -> bool {
    let n = w.len();
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => w[i] & bit(&a.name) != 0,
        Formula::Not(g) => !holds(g, w, i),
        Formula::And(gs) => gs.iter().all(|g| holds(g, w, i)),
        Formula::Or(gs) => gs.iter().any(|g| holds(g, w, i)),
        Formula::Implies(a, b) => !holds(a, w, i) || holds(b, w, i),
        Formula::Next(g) => i + 1 < n && holds(g, w, i + 1),
        Formula::WeakNext(g) => i + 1 >= n || holds(g, w, i + 1),
        Formula::Globally(g) => (i..n).all(|j| holds(g, w, j)),
        Formula::Finally(g) => (i..n).any(|j| holds(g, w, j)),
        Formula::Until(a, b) => (i..n).any(|j| holds(b, w, j) && (i..j).all(|k| holds(a, w, k))),
        Formula::Release(a, b) => (i..n).all(|j| holds(b, w, j) || (i..j).any(|k| holds(a, w, k))),
    }
}

/// Whole-trace satisfaction; the empty trace satisfies `G p` only.
pub fn models(f: &Formula, w: &[Letter]) -> bool {
    if w.is_empty() {
        return matches!(f, Formula::Globally(_) | Formula::True);
    }
    holds(f, w, 0)
}

/// Nesting depth of next operators.
pub fn next_depth(f: &Formula) -> usize {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => 0,
        Formula::Next(g) | Formula::WeakNext(g) => 1 + next_depth(g),
        Formula::Not(g) | Formula::Globally(g) | Formula::Finally(g) => next_depth(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().map(next_depth).max().unwrap_or(0),
        Formula::Implies(a, b) | Formula::Until(a, b) | Formula::Release(a, b) => {
            next_depth(a).max(next_depth(b))
        }
    }
}

/// `u` is a bad prefix of `G body`: no finite extension (including the
/// empty one) satisfies it. `body` may only use next operators, so the
/// truth of `body` at a position depends on the `next_depth + 1` letters
/// from there; the search runs over the last `next_depth` letters.
pub fn is_bad_prefix(body: &Formula, u: &[Letter]) -> bool {
    let d = next_depth(body);
    let n = u.len();
    // Positions whose window lies inside `u` are already decided.
    for k in 0..n.saturating_sub(d) {
        if !holds(body, &u[k..k + d + 1], 0) {
            return true;
        }
    }
    let start: Vec<Letter> = u[n.saturating_sub(d)..].to_vec();
    let ends_ok = |t: &[Letter]| (0..t.len()).all(|k| holds(body, t, k));
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        if ends_ok(&t) {
            return false;
        }
        for c in 0..(1u8 << ATOMS.len()) {
            let mut next = t.clone();
            next.push(c);
            if next.len() > d {
                if !holds(body, &next, 0) {
                    continue;
                }
                next.remove(0);
            }
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    true
}

/// Penalty count of a weighted monitor with reset semantics, by trace
/// splitting: a safety rule is charged for every shortest bad prefix and
/// restarts after it; a guarantee rule is charged once if the whole trace
/// fails it.
pub fn oracle_count(f: &Formula, w: &[Letter]) -> u64 {
    match f {
        Formula::Globally(body) => {
            let mut count = 0;
            let mut start = 0;
            for j in 0..w.len() {
                if is_bad_prefix(body, &w[start..=j]) {
                    count += 1;
                    start = j + 1;
                }
            }
            count
        }
        Formula::Finally(_) => u64::from(!models(f, w)),
        other => panic!("oracle expects G or F at the top, got {other}"),
    }
}

fn random_body(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            k => Formula::atom(ATOMS[k % ATOMS.len()]),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..7) {
        0 => Formula::not(random_body(rng, d)),
        1 => Formula::And(vec![random_body(rng, d), random_body(rng, d)]),
        2 => Formula::Or(vec![random_body(rng, d), random_body(rng, d)]),
        3 => Formula::implies(random_body(rng, d), random_body(rng, d)),
        4 | 5 => Formula::next(random_body(rng, d)),
        _ => Formula::weak_next(random_body(rng, d)),
    }
}

/// `G p` or `F p` with `p` next-only, at most three atoms and total depth
/// at most three.
pub fn random_obligation(rng: &mut ChaCha8Rng) -> Formula {
    let body = random_body(rng, 2);
    if rng.gen_bool(0.6) {
        Formula::globally(body)
    } else {
        Formula::finally(body)
    }
}

pub fn random_trace(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<Letter> {
    let n = rng.gen_range(1..=max_len);
    (0..n)
        .map(|_| rng.gen_range(0..(1u8 << ATOMS.len())))
        .collect()
}

/// Labels for a trace; `alive` on every step but the last.
pub fn to_labels(w: &[Letter]) -> Vec<LabelSet> {
    w.iter()
        .enumerate()
        .map(|(i, &c)| {
            let mut l = LabelSet::new(i + 1 < w.len());
            for (b, name) in ATOMS.iter().enumerate() {
                if c & (1 << b) != 0 {
                    l.insert(Atom::new(*name));
                }
            }
            l
        })
        .collect()
}

/// Penalties charged by a fresh library monitor over `w`, or `None` if the
/// formula does not compile as a rule (e.g. it canonicalizes to a
/// constant).
pub fn monitor_count(f: &Formula, w: &[Letter]) -> Option<u64> {
    use rulemcts::ltlf::{RuleMonitor, RuleTemplate};
    let t = RuleTemplate::compile("r", f).ok()?;
    let mut m = RuleMonitor::instantiate(&t, 1.0, 0, None).ok()?;
    Some(to_labels(w).iter().filter(|l| m.step(l) < 0.0).count() as u64)
}
