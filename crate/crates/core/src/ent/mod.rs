//! Entropy-based multi-step variant for flat conjunctions and disjunctions,
//! with predicate-wise accounting and redistribution of unused β.

mod ddpwlm;
mod entropy;

use serde::{Deserialize, Serialize};

pub use ddpwlm::{ddpwlm, DdpwlmOutput, EntConfig};
pub use entropy::{entropy_bounds, min_entropy, min_entropy_exact, min_entropy_greedy, EXACT_LIMIT};

use crate::apportion::{alpha_split, beta_split_tree, ApportionInput};
use crate::data::BoundQuery;
use crate::dp::{PrivacyAccountant, RandomSource};
use crate::engine::{Budget, Outcome, ProbeResult};
use crate::error::{Error, Result};
use crate::query::QueryTree;
use crate::PredicateSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    And,
    Or,
}

/// Sub-queries in evaluation order; `ops[i]` joins sub-query `i + 1` to the
/// result so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatQuery {
    pub ids: Vec<String>,
    pub ops: Vec<Op>,
}

/// Reads a tree as a flat operator sequence: either left-deep, or built from
/// a single operator throughout.
pub fn flatten(tree: &QueryTree) -> Result<FlatQuery> {
    fn left_deep(t: &QueryTree, ids: &mut Vec<String>, ops: &mut Vec<Op>) -> bool {
        match t {
            QueryTree::Leaf(id) => {
                ids.push(id.clone());
                true
            }
            QueryTree::And(l, r) | QueryTree::Or(l, r) => {
                let QueryTree::Leaf(rid) = r.as_ref() else {
                    return false;
                };
                if !left_deep(l, ids, ops) {
                    return false;
                }
                ops.push(if matches!(t, QueryTree::And(..)) { Op::And } else { Op::Or });
                ids.push(rid.clone());
                true
            }
        }
    }
    fn uniform(t: &QueryTree, op: Op, ids: &mut Vec<String>) -> bool {
        match (t, op) {
            (QueryTree::Leaf(id), _) => {
                ids.push(id.clone());
                true
            }
            (QueryTree::And(l, r), Op::And) | (QueryTree::Or(l, r), Op::Or) => {
                uniform(l, op, ids) && uniform(r, op, ids)
            }
            _ => false,
        }
    }
    let (mut ids, mut ops) = (Vec::new(), Vec::new());
    if left_deep(tree, &mut ids, &mut ops) {
        return Ok(FlatQuery { ids, ops });
    }
    for op in [Op::And, Op::Or] {
        let mut ids = Vec::new();
        if uniform(tree, op, &mut ids) {
            let ops = vec![op; ids.len() - 1];
            return Ok(FlatQuery { ids, ops });
        }
    }
    Err(Error::NotFlat(tree.to_string()))
}

/// Budgets of one sub-query of a multi-step run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubQueryTrace {
    pub position: usize,
    pub atomic_id: String,
    /// Residual β before this sub-query was apportioned.
    pub beta_residual: f64,
    pub beta_assigned: f64,
    pub beta_used: f64,
    pub iterations: usize,
    pub epsilons: Vec<f64>,
    pub u0: f64,
    pub u_opt: Option<f64>,
    /// Not run because a conjunction with the empty result made it moot.
    pub skipped: bool,
}

/// Multi-step mechanism over a flat query. β is apportioned over the
/// sub-queries still to run; whatever a sub-query leaves unused by exiting
/// early is handed on to the rest.
pub fn ent_probe(
    query: &BoundQuery,
    budget: &Budget,
    config: &EntConfig,
    rng: &mut RandomSource,
) -> Result<ProbeResult> {
    budget.validate()?;
    config.validate()?;
    let flat = flatten(&query.compiled.tree)?;
    let n = flat.ids.len();
    let atoms: Vec<usize> = flat
        .ids
        .iter()
        .map(|id| query.compiled.index_of(id).ok_or_else(|| Error::UnknownAtomic(id.clone())))
        .collect::<Result<_>>()?;
    let u0: Vec<f64> = atoms
        .iter()
        .map(|&a| config.u0_fraction * query.atomics[a].range_width())
        .collect();
    let dg: Vec<f64> = atoms.iter().map(|&a| query.atomics[a].sensitivity()).collect();
    let alphas = alpha_split(budget.alpha, &vec![1; n]);

    let mut accountant = PrivacyAccountant::new(budget.epsilon_max, query.k);
    let mut runs = Vec::new();
    let mut traces = Vec::with_capacity(n);
    let mut slot_epsilon = vec![0.0; n];
    let mut beta_rem = budget.beta;
    let mut result: Option<PredicateSet> = None;
    let mut outcome = None;

    for i in 0..n {
        let atomic = &query.atomics[atoms[i]];
        let op = if i == 0 { None } else { Some(flat.ops[i - 1]) };
        let moot = op == Some(Op::And) && result.as_ref().is_some_and(|r| r.is_empty());
        let mut trace = SubQueryTrace {
            position: i,
            atomic_id: flat.ids[i].clone(),
            beta_residual: beta_rem,
            beta_assigned: 0.0,
            beta_used: 0.0,
            iterations: 0,
            epsilons: Vec::new(),
            u0: u0[i],
            u_opt: None,
            skipped: moot,
        };
        if moot {
            traces.push(trace);
            if flat.ops[i - 1..].iter().all(|&o| o == Op::And) {
                for j in i + 1..n {
                    traces.push(SubQueryTrace {
                        position: j,
                        atomic_id: flat.ids[j].clone(),
                        beta_residual: beta_rem,
                        beta_assigned: 0.0,
                        beta_used: 0.0,
                        iterations: 0,
                        epsilons: Vec::new(),
                        u0: u0[j],
                        u_opt: None,
                        skipped: true,
                    });
                }
                break;
            }
            continue;
        }
        let input = ApportionInput::flat(u0[i..].to_vec(), dg[i..].to_vec(), beta_rem)?;
        let beta_i = beta_split_tree(&input)?.betas[0];
        trace.beta_assigned = beta_i;
        let spent_before = accountant.spent();
        let out = ddpwlm(
            atomic,
            i,
            u0[i],
            beta_i,
            alphas[i],
            config,
            &mut accountant,
            &mut runs,
            rng,
        )?;
        slot_epsilon[i] = accountant.spent() - spent_before;
        trace.epsilons = runs.iter().filter(|r| r.slot == i).map(|r| r.epsilon).collect();
        trace.iterations = trace.epsilons.len();
        let out = match out {
            Ok(o) => o,
            Err(d) => {
                traces.push(trace);
                outcome = Some(Outcome::Denied(d));
                break;
            }
        };
        trace.beta_used = out.beta_used;
        trace.u_opt = out.u_opt;
        traces.push(trace);
        beta_rem -= out.beta_used;
        result = Some(match (result, op) {
            (None, _) | (_, None) => out.reported,
            (Some(r), Some(Op::And)) => r.intersection(&out.reported).copied().collect(),
            (Some(r), Some(Op::Or)) => r.union(&out.reported).copied().collect(),
        });
    }

    let outcome = outcome.unwrap_or_else(|| Outcome::Answered(result.unwrap_or_default()));
    let mut atomic_epsilon = vec![0.0; query.compiled.n()];
    for (i, &a) in atoms.iter().enumerate() {
        atomic_epsilon[a] += slot_epsilon[i];
    }
    Ok(ProbeResult {
        outcome,
        epsilon: accountant.spent(),
        epsilon_max: budget.epsilon_max,
        slot_epsilon,
        atomic_epsilon,
        ledger: accountant.ledger().clone(),
        runs,
        estimates: Vec::new(),
        subqueries: traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_expression;

    #[test]
    fn flatten_shapes() {
        let f = flatten(&parse_expression("A AND B OR C").unwrap()).unwrap();
        assert_eq!(f.ids, vec!["A", "B", "C"]);
        assert_eq!(f.ops, vec![Op::And, Op::Or]);
        let f = flatten(&parse_expression("A AND (B AND C)").unwrap()).unwrap();
        assert_eq!(f.ops, vec![Op::And, Op::And]);
        assert!(matches!(
            flatten(&parse_expression("A AND (B OR C)").unwrap()),
            Err(Error::NotFlat(_))
        ));
    }
}
