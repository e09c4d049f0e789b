//! Query tree minimization (Quine-McCluskey).
//!
//! The tree is tabulated over all `2^n` assignments of its distinct atomics,
//! prime implicants are generated by iterated merging, and a minimum-literal
//! cover is selected. Both the sum-of-products form and the product-of-sums
//! form (obtained from the dual function) are built; the one with fewer
//! leaves wins, SOP on ties. Trees without negation denote monotone
//! functions, so every selected implicant is a product of plain atomics.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::query::QueryTree;

pub const MAX_ATOMICS: usize = 16;

/// Query tree ready for execution: the (optionally minimized) tree plus the
/// number of leaves referencing each distinct atomic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledQuery {
    pub tree: QueryTree,
    /// Distinct atomic ids in order of first appearance in `tree`.
    pub atomics: Vec<String>,
    /// `occurrences[i]` counts the leaves of `tree` referencing `atomics[i]`.
    pub occurrences: Vec<usize>,
}

impl CompiledQuery {
    /// Compiles a tree as written, without minimization.
    pub fn from_tree(tree: QueryTree) -> Self {
        let atomics = tree.distinct_ids();
        let leaves = tree.leaves();
        let occurrences = atomics
            .iter()
            .map(|id| leaves.iter().filter(|l| **l == id.as_str()).count())
            .collect();
        Self {
            tree,
            atomics,
            occurrences,
        }
    }

    pub fn n(&self) -> usize {
        self.atomics.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.atomics.iter().position(|a| a == id)
    }

    pub fn occurrence(&self, id: &str) -> Option<usize> {
        self.index_of(id).map(|i| self.occurrences[i])
    }

    pub fn leaf_count(&self) -> usize {
        self.occurrences.iter().sum()
    }
}

/// Product term over variable indices: `care` marks the literals present,
/// `bits` their polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Implicant {
    bits: u32,
    care: u32,
}

impl Implicant {
    fn covers(&self, minterm: u32) -> bool {
        minterm & self.care == self.bits
    }

    fn literals(&self) -> u32 {
        self.care.count_ones()
    }
}

fn prime_implicants(minterms: &[u32], n: usize) -> Vec<Implicant> {
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut level: HashSet<Implicant> = minterms
        .iter()
        .map(|&m| Implicant { bits: m, care: full })
        .collect();
    let mut primes = Vec::new();
    while !level.is_empty() {
        let mut merged: HashSet<Implicant> = HashSet::new();
        let mut used: HashSet<Implicant> = HashSet::new();
        for imp in &level {
            for b in 0..n {
                let bit = 1u32 << b;
                if imp.care & bit == 0 || imp.bits & bit == 0 {
                    continue;
                }
                let partner = Implicant {
                    bits: imp.bits & !bit,
                    care: imp.care,
                };
                if level.contains(&partner) {
                    merged.insert(Implicant {
                        bits: imp.bits & !bit,
                        care: imp.care & !bit,
                    });
                    used.insert(*imp);
                    used.insert(partner);
                }
            }
        }
        let mut rest: Vec<Implicant> = level.difference(&used).copied().collect();
        rest.sort_by_key(|i| (i.care, i.bits));
        primes.extend(rest);
        level = merged;
    }
    primes
}

/// Minimum-literal cover: essential primes first, then exact branch and
/// bound over the remainder (greedy beyond a small search budget).
fn select_cover(primes: &[Implicant], minterms: &[u32]) -> Vec<Implicant> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut uncovered: Vec<u32> = minterms.to_vec();
    loop {
        let mut essential = None;
        for &m in &uncovered {
            let covering: Vec<usize> = (0..primes.len()).filter(|&p| primes[p].covers(m)).collect();
            if covering.len() == 1 && !chosen.contains(&covering[0]) {
                essential = Some(covering[0]);
                break;
            }
        }
        match essential {
            Some(p) => {
                chosen.push(p);
                uncovered.retain(|&m| !primes[p].covers(m));
            }
            None => break,
        }
    }
    if !uncovered.is_empty() {
        let candidates: Vec<usize> = (0..primes.len())
            .filter(|p| !chosen.contains(p) && uncovered.iter().any(|&m| primes[*p].covers(m)))
            .collect();
        let extra = if candidates.len() <= 24 {
            exact_cover(primes, &candidates, &uncovered)
        } else {
            greedy_cover(primes, &candidates, &uncovered)
        };
        chosen.extend(extra);
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|p| primes[p]).collect()
}

fn greedy_cover(primes: &[Implicant], candidates: &[usize], uncovered: &[u32]) -> Vec<usize> {
    let mut left: Vec<u32> = uncovered.to_vec();
    let mut out = Vec::new();
    while !left.is_empty() {
        let best = candidates
            .iter()
            .copied()
            .filter(|p| !out.contains(p))
            .max_by(|&a, &b| {
                let sa = left.iter().filter(|&&m| primes[a].covers(m)).count() as f64
                    / primes[a].literals().max(1) as f64;
                let sb = left.iter().filter(|&&m| primes[b].covers(m)).count() as f64
                    / primes[b].literals().max(1) as f64;
                sa.total_cmp(&sb).then(b.cmp(&a))
            })
            .expect("primes cover every minterm");
        out.push(best);
        left.retain(|&m| !primes[best].covers(m));
    }
    out
}

fn exact_cover(primes: &[Implicant], candidates: &[usize], uncovered: &[u32]) -> Vec<usize> {
    fn search(
        primes: &[Implicant],
        candidates: &[usize],
        left: &[u32],
        picked: &mut Vec<usize>,
        cost: u32,
        best: &mut (u32, Vec<usize>),
    ) {
        if cost >= best.0 {
            return;
        }
        let Some(&m) = left.first() else {
            *best = (cost, picked.clone());
            return;
        };
        for &p in candidates.iter().filter(|&&p| primes[p].covers(m)) {
            let rest: Vec<u32> = left.iter().copied().filter(|&x| !primes[p].covers(x)).collect();
            picked.push(p);
            search(primes, candidates, &rest, picked, cost + primes[p].literals(), best);
            picked.pop();
        }
    }
    let greedy = greedy_cover(primes, candidates, uncovered);
    let greedy_cost = greedy.iter().map(|&p| primes[p].literals()).sum::<u32>();
    let mut best = (greedy_cost + 1, greedy);
    search(primes, candidates, uncovered, &mut Vec::new(), 0, &mut best);
    best.1
}

/// Builds a right-leaning chain `x0 op (x1 op (...))`.
fn chain(mut items: Vec<QueryTree>, join: fn(QueryTree, QueryTree) -> QueryTree) -> QueryTree {
    let mut acc = items.pop().expect("non-empty chain");
    while let Some(next) = items.pop() {
        acc = join(next, acc);
    }
    acc
}

fn two_level(
    terms: &[Implicant],
    ids: &[String],
    inner: fn(QueryTree, QueryTree) -> QueryTree,
    outer: fn(QueryTree, QueryTree) -> QueryTree,
) -> Result<QueryTree> {
    let mut terms = terms.to_vec();
    terms.sort_by_key(|t| {
        let vars: Vec<u32> = (0..32).filter(|b| t.care & (1 << b) != 0).collect();
        (t.literals(), vars)
    });
    let mut out = Vec::with_capacity(terms.len());
    for t in &terms {
        if t.bits != t.care {
            return Err(Error::InvalidParameter(
                "minimized form needs a negated atomic; only monotone queries are supported".into(),
            ));
        }
        let lits: Vec<QueryTree> = (0..ids.len())
            .filter(|&b| t.care & (1 << b) != 0)
            .map(|b| QueryTree::leaf(ids[b].clone()))
            .collect();
        out.push(chain(lits, inner));
    }
    Ok(chain(out, outer))
}

fn truth_table(tree: &QueryTree, ids: &[String]) -> Vec<bool> {
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    (0u32..(1u32 << ids.len()))
        .map(|mask| tree.eval_with(&mut |id| mask & (1 << index[id]) != 0))
        .collect()
}

/// Minimizes a query tree to the fewest leaves reachable by two-level
/// minimization, keeping the original tree only when it is strictly smaller.
pub fn minimize_tree(tree: &QueryTree) -> Result<CompiledQuery> {
    let ids = tree.distinct_ids();
    let n = ids.len();
    if n > MAX_ATOMICS {
        return Err(Error::TooManyAtomics(n));
    }
    let table = truth_table(tree, &ids);
    let full = (1u32 << n) - 1;
    let on: Vec<u32> = (0..table.len() as u32).filter(|&m| table[m as usize]).collect();
    // Dual function g(x) = !f(!x); its SOP is the POS of f with AND/OR swapped.
    let dual_on: Vec<u32> = (0..table.len() as u32)
        .filter(|&m| !table[(!m & full) as usize])
        .collect();
    if on.is_empty() || dual_on.is_empty() {
        // Unreachable for monotone trees over at least one atomic.
        return Ok(CompiledQuery::from_tree(tree.clone()));
    }

    let sop_terms = select_cover(&prime_implicants(&on, n), &on);
    let sop = two_level(&sop_terms, &ids, QueryTree::and, QueryTree::or)?;
    let pos_terms = select_cover(&prime_implicants(&dual_on, n), &dual_on);
    let pos = two_level(&pos_terms, &ids, QueryTree::or, QueryTree::and)?;

    let mut best = sop;
    if pos.leaf_count() < best.leaf_count() {
        best = pos;
    }
    if tree.leaf_count() < best.leaf_count() {
        best = tree.clone();
    }
    Ok(CompiledQuery::from_tree(best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_expression;

    fn equivalent(a: &QueryTree, b: &QueryTree) -> bool {
        let ids = a.distinct_ids();
        let index: HashMap<&str, usize> =
            ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        (0u32..(1 << ids.len())).all(|mask| {
            let mut f = |id: &str| index.get(id).map_or(false, |&i| mask & (1 << i) != 0);
            a.eval_with(&mut f) == b.eval_with(&mut f)
        })
    }

    #[test]
    fn distributed_tree_collapses() {
        let t = parse_expression("(Q1 OR Q2) AND (Q1 OR Q3)").unwrap();
        let c = minimize_tree(&t).unwrap();
        assert_eq!(c.tree, parse_expression("Q1 OR Q2 AND Q3").unwrap());
        assert_eq!(c.atomics, vec!["Q1", "Q2", "Q3"]);
        assert_eq!(c.occurrences, vec![1, 1, 1]);
    }

    #[test]
    fn idempotence() {
        let c = minimize_tree(&parse_expression("Q1 AND Q1").unwrap()).unwrap();
        assert_eq!(c.tree, QueryTree::leaf("Q1"));
        assert_eq!(c.occurrences, vec![1]);
    }

    #[test]
    fn absorption_drops_atomic() {
        let c = minimize_tree(&parse_expression("Q1 OR Q1 AND Q2").unwrap()).unwrap();
        assert_eq!(c.tree, QueryTree::leaf("Q1"));
        assert_eq!(c.atomics, vec!["Q1"]);
    }

    #[test]
    fn product_of_sums_when_smaller() {
        let t = parse_expression("(Q1 OR Q2) AND (Q3 OR Q4)").unwrap();
        let c = minimize_tree(&t).unwrap();
        assert_eq!(c.tree.leaf_count(), 4);
        assert!(equivalent(&t, &c.tree));
    }

    #[test]
    fn four_atomic_expression() {
        let t = parse_expression("(Q1 AND Q2) OR (Q1 AND Q3) OR (Q2 AND Q3 AND Q1) OR Q4 AND Q4").unwrap();
        let c = minimize_tree(&t).unwrap();
        assert!(equivalent(&t, &c.tree));
        assert_eq!(c.tree.leaf_count(), 5);
    }

    #[test]
    fn too_many_atomics() {
        let text = (0..17).map(|i| format!("Q{i}")).collect::<Vec<_>>().join(" OR ");
        let t = parse_expression(&text).unwrap();
        assert!(matches!(minimize_tree(&t), Err(Error::TooManyAtomics(17))));
    }

    #[test]
    fn from_tree_counts_occurrences() {
        let t = parse_expression("(Q1 OR Q2) AND (Q1 OR Q3)").unwrap();
        let c = CompiledQuery::from_tree(t);
        assert_eq!(c.occurrences, vec![2, 1, 1]);
        assert_eq!(c.leaf_count(), 4);
    }
}
