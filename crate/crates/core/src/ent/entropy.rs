//! Min-entropy of a predicate-wise privacy ledger.
//!
//! A ledger `Θ = (ε_1..ε_k)` confines an adversary's posterior to the box
//! `e^{-ε_i}/Σe^{ε} ≤ p_i ≤ e^{ε_i}/Σe^{-ε}` on the simplex. The min-entropy
//! is the smallest Shannon entropy (natural log) over that polytope.
//! Entropy is concave, so the minimum sits at a vertex: every coordinate but
//! one at a bound.

use crate::dp::PwdpLedger;
use crate::error::{Error, Result};

/// Exact enumeration is used up to this many predicates.
pub const EXACT_LIMIT: usize = 12;

const FEAS_TOL: f64 = 1e-12;

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// Box bounds implied by a ledger.
pub fn entropy_bounds(eps: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let lse_pos = log_sum_exp(eps.iter().copied());
    let lse_neg = log_sum_exp(eps.iter().map(|e| -e));
    let lo = eps.iter().map(|e| (-e - lse_pos).exp()).collect();
    let hi = eps.iter().map(|e| (e - lse_neg).exp()).collect();
    (lo, hi)
}

fn entropy(p: &[f64]) -> f64 {
    // `+ 0.0` turns a negative zero into zero.
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>() + 0.0
}

fn check_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    let slo: f64 = lo.iter().sum();
    let shi: f64 = hi.iter().sum();
    if lo.is_empty() || slo > 1.0 + 1e-9 || shi < 1.0 - 1e-9 {
        return Err(Error::InfeasibleEntropyBox(slo));
    }
    Ok(())
}

/// Minimum entropy by enumerating every vertex of the box-simplex polytope.
pub fn min_entropy_exact(lo: &[f64], hi: &[f64]) -> Result<f64> {
    check_box(lo, hi)?;
    let k = lo.len();
    if k > 24 {
        return Err(Error::InvalidParameter(format!("exact enumeration over {k} predicates")));
    }
    let mut best = f64::INFINITY;
    let mut p = vec![0.0; k];
    for free in 0..k {
        for mask in 0u32..(1 << (k - 1)) {
            let mut bit = 0;
            let mut rest = 0.0;
            for i in 0..k {
                if i == free {
                    continue;
                }
                p[i] = if mask >> bit & 1 == 1 { hi[i] } else { lo[i] };
                rest += p[i];
                bit += 1;
            }
            let pf = 1.0 - rest;
            if pf < lo[free] - FEAS_TOL || pf > hi[free] + FEAS_TOL {
                continue;
            }
            p[free] = pf.clamp(lo[free], hi[free]);
            best = best.min(entropy(&p));
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::InfeasibleEntropyBox(lo.iter().sum()))
    }
}

/// Raises coordinates from their lower bounds, in the order `pick` chooses,
/// until the slack is used up.
fn saturate(lo: &[f64], hi: &[f64], mut pick: impl FnMut(&[f64], &[bool], f64) -> Option<usize>) -> Vec<f64> {
    let mut p = lo.to_vec();
    let mut open = vec![true; lo.len()];
    let mut slack = 1.0 - lo.iter().sum::<f64>();
    while slack > 0.0 {
        let Some(i) = pick(&p, &open, slack) else { break };
        open[i] = false;
        let add = (hi[i] - lo[i]).min(slack);
        p[i] += add;
        slack -= add;
    }
    p
}

/// Moves mass from smaller to larger coordinates until no pairwise transfer
/// is possible; each such move lowers entropy.
fn polish(p: &mut [f64], lo: &[f64], hi: &[f64]) {
    let k = p.len();
    let mut order: Vec<usize> = (0..k).collect();
    for _ in 0..4 * k {
        order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
        let mut moved = false;
        for x in 0..k {
            let a = order[x];
            for &b in order[x + 1..].iter().rev() {
                let d = (p[a] - lo[a]).min(hi[b] - p[b]);
                if d > 1e-15 {
                    p[a] -= d;
                    p[b] += d;
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
}

/// Heuristic minimum for large ledgers: the best of a few saturation
/// orders, each followed by pairwise polishing. Ledger boxes are nested (a
/// larger ε widens both ends), which makes the exact problem knapsack-like,
/// so this is an upper bound on the exact value rather than a guaranteed
/// optimum.
pub fn min_entropy_greedy(lo: &[f64], hi: &[f64]) -> Result<f64> {
    check_box(lo, hi)?;
    let k = lo.len();
    let by_upper = {
        let mut o: Vec<usize> = (0..k).collect();
        o.sort_by(|&a, &b| hi[b].total_cmp(&hi[a]));
        o
    };
    let by_lower = {
        let mut o: Vec<usize> = (0..k).collect();
        o.sort_by(|&a, &b| lo[b].total_cmp(&lo[a]));
        o
    };
    let in_order = |order: Vec<usize>| {
        let mut next = 0;
        move |_: &[f64], _: &[bool], _: f64| {
            let i = order.get(next).copied();
            next += 1;
            i
        }
    };
    // Raise whichever coordinate would end up largest.
    let largest = |p: &[f64], open: &[bool], slack: f64| {
        (0..k)
            .filter(|&i| open[i])
            .max_by(|&a, &b| hi[a].min(p[a] + slack).total_cmp(&hi[b].min(p[b] + slack)))
    };
    let starts = [
        saturate(lo, hi, largest),
        saturate(lo, hi, in_order(by_upper)),
        saturate(lo, hi, in_order(by_lower)),
    ];
    let mut best = f64::INFINITY;
    for mut p in starts {
        polish(&mut p, lo, hi);
        best = best.min(entropy(&p));
    }
    Ok(best)
}

/// Min-entropy of a ledger: exact up to [`EXACT_LIMIT`] predicates, greedy
/// beyond.
pub fn min_entropy(ledger: &PwdpLedger) -> Result<f64> {
    let (lo, hi) = entropy_bounds(&ledger.entries);
    if ledger.k() <= EXACT_LIMIT {
        min_entropy_exact(&lo, &hi)
    } else {
        min_entropy_greedy(&lo, &hi)
    }
}
