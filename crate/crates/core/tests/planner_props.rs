//! Thresholded ordering and search properties.

mod common;

use std::cmp::Ordering;

use common::uct::{scalar_uct, ToyTree};
use proptest::prelude::*;
use rulemcts::planner::{
    lexicographic, plan, tlo_compare, tlo_leq, MctsParams, RewardVector, TloOrdering,
};

fn lex_leq(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x < y;
        }
    }
    true
}

fn small_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    // Few distinct values so that ties are common.
    proptest::collection::vec((-3i32..=3).prop_map(|x| x as f64 * 0.5), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn infinite_thresholds_give_lexicographic_order(a in small_vec(3), b in small_vec(3)) {
        let tau = [f64::INFINITY; 3];
        prop_assert_eq!(tlo_leq(&a, &b, &tau), lex_leq(&a, &b));
        let expected = match lexicographic(&a, &b) {
            Ordering::Less => TloOrdering::Worse,
            Ordering::Greater => TloOrdering::Better,
            Ordering::Equal => TloOrdering::Equivalent,
        };
        prop_assert_eq!(tlo_compare(&a, &b, &tau).unwrap(), expected);
    }

    #[test]
    fn tlo_is_total_and_transitive(a in small_vec(3), b in small_vec(3), c in small_vec(3), t in small_vec(3)) {
        prop_assert!(tlo_leq(&a, &b, &t) || tlo_leq(&b, &a, &t));
        if tlo_leq(&a, &b, &t) && tlo_leq(&b, &c, &t) {
            prop_assert!(tlo_leq(&a, &c, &t));
        }
    }
}

#[test]
fn threshold_lets_lower_priority_decide() {
    // Both above the first threshold: the second entry decides.
    let tau = [-0.5, f64::NEG_INFINITY];
    assert!(tlo_leq(&[-0.4, -5.0], &[-0.1, 0.0], &tau));
    assert!(tlo_leq(&[-0.1, -5.0], &[-0.4, 0.0], &tau));
    // First entry below its threshold: the first entry decides.
    let (r, r2) = ([-1.0, 0.0], [-0.4, -5.0]);
    assert!(tlo_leq(&r, &r2, &tau));
    assert!(!tlo_leq(&r2, &r, &tau));
}

fn params(seed: u64, iterations: usize, scale: f64) -> MctsParams {
    MctsParams {
        iterations,
        exploration: 1.0,
        discount: 0.95,
        thresholds: RewardVector::from_slice(&[-0.5 * scale]),
        seed,
    }
}

#[test]
fn one_dimension_matches_scalar_uct() {
    let mut chosen = std::collections::BTreeSet::new();
    for seed in 0..20 {
        let tree = ToyTree {
            seed,
            actions: 2 + (seed % 3) as usize,
            depth: 4,
            scale: 1.0,
        };
        let got = plan(&tree, tree.root(), params(seed, 300, 1.0)).unwrap();
        assert_eq!(
            got.action,
            scalar_uct(&tree, 300, 1.0, 0.95, seed),
            "toy seed {seed}"
        );
        assert!(got.nodes <= 301);
        chosen.insert(got.action);
    }
    assert!(
        chosen.len() > 1,
        "toy problems should not all share one answer"
    );
}

#[test]
fn scaling_rewards_and_thresholds_keeps_the_choice() {
    for seed in 0..10 {
        let tree = ToyTree {
            seed,
            actions: 3,
            depth: 4,
            scale: 1.0,
        };
        let scaled = ToyTree {
            scale: 4.0,
            ..tree.clone()
        };
        let a = plan(&tree, tree.root(), params(seed, 200, 1.0))
            .unwrap()
            .action;
        let b = plan(&scaled, scaled.root(), params(seed, 200, 4.0))
            .unwrap()
            .action;
        assert_eq!(a, b, "toy seed {seed}");
    }
}

#[test]
fn search_is_reproducible() {
    let tree = ToyTree {
        seed: 5,
        actions: 4,
        depth: 5,
        scale: 1.0,
    };
    let a = plan(&tree, tree.root(), params(9, 500, 1.0)).unwrap();
    let b = plan(&tree, tree.root(), params(9, 500, 1.0)).unwrap();
    assert_eq!(a, b);
}
