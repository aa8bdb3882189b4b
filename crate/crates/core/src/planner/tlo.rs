//! Thresholded lexicographic ordering of reward vectors.
//!
//! `r ⪯ r'` holds when, at the first index `i` that is not settled, `r_i ≤
//! r'_i`. Index `j` is settled when both entries exceed `τ_j` or when they
//! are equal. The last index is never settled, so its threshold is unused.
//! With `τ = +∞` this is the lexicographic weak order.

use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("reward vectors of dimension {left} and {right} compared with {thresholds} thresholds")]
pub struct DimensionMismatch {
    pub left: usize,
    pub right: usize,
    pub thresholds: usize,
}

/// Result of comparing `r` with `r'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TloOrdering {
    /// `r ⪯ r'` only.
    Worse,
    /// `r' ⪯ r` only.
    Better,
    /// Both directions hold.
    Equivalent,
    /// Neither direction holds. Cannot happen for finite inputs; kept so
    /// that the result type covers the relation in full.
    Incomparable,
}

fn settled(a: f64, b: f64, tau: f64) -> bool {
    (a > tau && b > tau) || a == b
}

fn check(r: &[f64], r2: &[f64], tau: &[f64]) -> Result<(), DimensionMismatch> {
    if r.len() != r2.len() || r.len() != tau.len() || r.is_empty() {
        return Err(DimensionMismatch {
            left: r.len(),
            right: r2.len(),
            thresholds: tau.len(),
        });
    }
    Ok(())
}

/// `r ⪯ r'`. Panics on mismatched dimensions.
pub fn tlo_leq(r: &[f64], r2: &[f64], tau: &[f64]) -> bool {
    check(r, r2, tau).expect("matching dimensions");
    let last = r.len() - 1;
    let k = (0..last)
        .find(|&j| !settled(r[j], r2[j], tau[j]))
        .unwrap_or(last);
    r[k] <= r2[k]
}

/// The comparison formula with `∃ i` ranging over every index.
///
/// Kept for reference: any two vectors with equal first entries are
/// mutually related under it, so it cannot rank by lower priorities.
pub fn tlo_leq_unrestricted(r: &[f64], r2: &[f64], tau: &[f64]) -> bool {
    check(r, r2, tau).expect("matching dimensions");
    (0..r.len()).any(|i| r[i] <= r2[i] && (0..i).all(|j| settled(r[j], r2[j], tau[j])))
}

pub fn tlo_compare(r: &[f64], r2: &[f64], tau: &[f64]) -> Result<TloOrdering, DimensionMismatch> {
    check(r, r2, tau)?;
    Ok(match (tlo_leq(r, r2, tau), tlo_leq(r2, r, tau)) {
        (true, true) => TloOrdering::Equivalent,
        (true, false) => TloOrdering::Worse,
        (false, true) => TloOrdering::Better,
        (false, false) => TloOrdering::Incomparable,
    })
}

/// `r'` is strictly better than `r`: `r ⪯ r'` and not `r' ⪯ r`.
pub fn strictly_better(r2: &[f64], r: &[f64], tau: &[f64]) -> bool {
    tlo_leq(r, r2, tau) && !tlo_leq(r2, r, tau)
}

/// Plain lexicographic comparison, used when no maximal element exists.
pub fn lexicographic(r: &[f64], r2: &[f64]) -> Ordering {
    r.iter()
        .zip(r2)
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Indices of the vectors that no other vector is strictly better than.
pub fn maximal_set(vectors: &[&[f64]], tau: &[f64]) -> Vec<usize> {
    (0..vectors.len())
        .filter(|&a| {
            !(0..vectors.len()).any(|b| b != a && strictly_better(vectors[b], vectors[a], tau))
        })
        .collect()
}
