//! False-positive estimation and the uncertain-region reset.

use serde::Serialize;

use crate::query::Direction;
use crate::PredicateSet;

/// Upper bound on false positives and lower bound on negatives for one
/// executed leaf.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpEstimate {
    pub f_est: f64,
    pub r_est: f64,
    /// Noisy value above the unshifted threshold ("definitely positive").
    pub o_pp: PredicateSet,
    /// Reported positive, noisy value above `c − u`.
    pub o_p: PredicateSet,
    /// Reported negative, noisy value below `c − u`.
    pub o_n: PredicateSet,
}

/// Noisy aggregates of one leaf together with the parameters it ran at.
#[derive(Debug, Clone, Copy)]
pub struct LeafView<'a> {
    pub noisy: &'a [f64],
    pub thresholds: &'a [f64],
    pub direction: Direction,
    pub u: f64,
    pub beta: f64,
}

impl LeafView<'_> {
    /// Oriented distance `c_j − G[j]`; positive below the threshold.
    fn gap(&self, j: usize) -> f64 {
        self.direction.orient(self.thresholds[j]) - self.direction.orient(self.noisy[j])
    }
}

/// Classifies the leaf's noisy values and bounds its false positives.
///
/// With `o_one` given, positives are restricted to it and negatives exclude
/// it: a predicate already decided by the rest of the query cannot change
/// the final answer through this leaf.
pub fn estimate_fps(leaf: LeafView<'_>, o_one: Option<&PredicateSet>) -> FpEstimate {
    let k = leaf.noisy.len();
    let mut o_pp = PredicateSet::new();
    let mut o_p = PredicateSet::new();
    let mut o_n = PredicateSet::new();
    for j in 0..k {
        let gap = leaf.gap(j);
        let in_one = o_one.is_none_or(|s| s.contains(&j));
        if gap < 0.0 && in_one {
            o_pp.insert(j);
        }
        if gap < leaf.u && in_one {
            o_p.insert(j);
        }
        if gap > leaf.u && !(o_one.is_some() && in_one) {
            o_n.insert(j);
        }
    }
    let beta = leaf.beta;
    let f_est = (o_p.len() - o_pp.len()) as f64 + o_pp.len() as f64 * beta;
    let r_est = (o_n.len() as f64 - beta * k as f64) / (1.0 - beta);
    FpEstimate {
        f_est,
        r_est,
        o_pp,
        o_p,
        o_n,
    }
}

/// Largest `u` not above the leaf's current one at which the estimate meets
/// `f_max`. Candidates are the gaps `c_j − G[j]` of the uncertain
/// predicates; `None` when even `u → 0⁺` leaves too many.
pub fn find_u_opt(leaf: LeafView<'_>, f_max: f64, o_one: Option<&PredicateSet>) -> Option<f64> {
    let est = estimate_fps(leaf, o_one);
    if est.f_est <= f_max {
        return Some(leaf.u);
    }
    let base = est.o_pp.len() as f64 * leaf.beta;
    let mut gaps: Vec<f64> = est.o_p.difference(&est.o_pp).map(|&j| leaf.gap(j)).collect();
    gaps.sort_by(|a, b| b.total_cmp(a));
    // At u = gaps[i] the predicates with gap < u remain uncertain.
    for (i, &u) in gaps.iter().enumerate() {
        if u <= 0.0 {
            break;
        }
        let remaining = gaps[i..].iter().filter(|&&g| g < u).count();
        if remaining as f64 + base <= f_max {
            return Some(u);
        }
    }
    None
}
