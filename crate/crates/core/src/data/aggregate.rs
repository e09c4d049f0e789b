use std::collections::{HashMap, HashSet};

use crate::data::{Dataset, Value};
use crate::error::{Error, Result};
use crate::harness::threshold_zscore;
use crate::query::{AggregateKind, AtomicQuery, Comparator, CompiledQuery, Direction, Filter, Thresholds};
use crate::PredicateSet;

/// Where the predicate domain comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PredicateSource {
    Explicit(Vec<Vec<Value>>),
    /// Distinct group-column tuples present in the data. This reads the
    /// private data and is meant for experiment setup only.
    FromData,
}

/// Ordered, duplicate-free list of group-by cells. Indices are stable for
/// the lifetime of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateDomain {
    pub group_columns: Vec<String>,
    pub predicates: Vec<Vec<Value>>,
    /// Set when the domain was read off the data rather than declared.
    pub derived_from_data: bool,
}

impl PredicateDomain {
    pub fn k(&self) -> usize {
        self.predicates.len()
    }

    pub fn index(&self) -> HashMap<&[Value], usize> {
        self.predicates
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_slice(), i))
            .collect()
    }
}

/// Builds the predicate domain, sorted lexicographically by value tuple.
pub fn enumerate_predicates(
    dataset: &Dataset,
    group_columns: &[String],
    source: PredicateSource,
) -> Result<PredicateDomain> {
    let cols: Vec<usize> = group_columns
        .iter()
        .map(|c| dataset.schema.index(c))
        .collect::<Result<_>>()?;
    let (mut predicates, derived) = match source {
        PredicateSource::Explicit(list) => {
            for p in &list {
                if p.len() != cols.len() {
                    return Err(Error::InvalidParameter(format!(
                        "predicate has {} values for {} group columns",
                        p.len(),
                        cols.len()
                    )));
                }
            }
            let distinct: HashSet<&Vec<Value>> = list.iter().collect();
            if distinct.len() != list.len() {
                return Err(Error::InvalidParameter("duplicate predicate in explicit domain".into()));
            }
            (list, false)
        }
        PredicateSource::FromData => {
            let set: HashSet<Vec<Value>> = dataset
                .rows
                .iter()
                .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
                .collect();
            (set.into_iter().collect(), true)
        }
    };
    if predicates.is_empty() {
        return Err(Error::EmptyDomain);
    }
    predicates.sort();
    Ok(PredicateDomain {
        group_columns: group_columns.to_vec(),
        predicates,
        derived_from_data: derived,
    })
}

/// Exact (non-private) aggregate of one atomic query per predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAggregates {
    pub atomic_id: String,
    pub values: Vec<f64>,
}

struct BoundFilter(Vec<(usize, Comparator, Value)>);

impl BoundFilter {
    fn new(dataset: &Dataset, filter: &Filter) -> Result<Self> {
        let mut out = Vec::with_capacity(filter.conditions.len());
        for cond in &filter.conditions {
            let idx = dataset.schema.index(&cond.column)?;
            let ty = dataset.schema.column_type(idx);
            let v = Value::from_literal(&cond.value, ty).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "literal `{}` does not fit column `{}`",
                    cond.value, cond.column
                ))
            })?;
            out.push((idx, cond.op, v));
        }
        Ok(Self(out))
    }

    fn keeps(&self, row: &[Value]) -> bool {
        self.0.iter().all(|(i, op, v)| op.holds(row[*i].cmp(v)))
    }
}

enum Acc {
    Count(Vec<f64>),
    Distinct(Vec<HashSet<Value>>),
    Sum(Vec<f64>),
    Avg(Vec<(f64, usize)>),
}

/// `values[j]` aggregates the rows passing the filter whose group columns
/// equal predicate `j`, clamped to the query's value range. Empty groups
/// count 0; an empty AVG takes the range's lower bound.
pub fn exact_aggregate(
    dataset: &Dataset,
    atomic: &AtomicQuery,
    domain: &PredicateDomain,
) -> Result<GroupAggregates> {
    let filter = BoundFilter::new(dataset, &atomic.filter)?;
    let group_cols: Vec<usize> = domain
        .group_columns
        .iter()
        .map(|c| dataset.schema.index(c))
        .collect::<Result<_>>()?;
    let agg_col = match atomic.aggregate.kind.column() {
        Some(c) => Some(dataset.schema.index(c)?),
        None => None,
    };
    let k = domain.k();
    let mut acc = match atomic.aggregate.kind {
        AggregateKind::CountStar => Acc::Count(vec![0.0; k]),
        AggregateKind::CountDistinct(_) => Acc::Distinct(vec![HashSet::new(); k]),
        AggregateKind::Sum(_) => Acc::Sum(vec![0.0; k]),
        AggregateKind::Avg(_) => Acc::Avg(vec![(0.0, 0); k]),
    };
    let index = domain.index();
    let mut key: Vec<Value> = Vec::with_capacity(group_cols.len());
    for (r, row) in dataset.rows.iter().enumerate() {
        if !filter.keeps(row) {
            continue;
        }
        key.clear();
        key.extend(group_cols.iter().map(|&c| row[c].clone()));
        let Some(&j) = index.get(key.as_slice()) else {
            continue;
        };
        let numeric = |c: usize| {
            row[c].as_f64().ok_or_else(|| Error::TypeConversion {
                row: r + 1,
                column: dataset.schema.columns[c].name.clone(),
                value: row[c].to_string(),
                expected: "number",
            })
        };
        match &mut acc {
            Acc::Count(v) => v[j] += 1.0,
            Acc::Distinct(v) => {
                v[j].insert(row[agg_col.unwrap()].clone());
            }
            Acc::Sum(v) => v[j] += numeric(agg_col.unwrap())?,
            Acc::Avg(v) => {
                v[j].0 += numeric(agg_col.unwrap())?;
                v[j].1 += 1;
            }
        }
    }
    let range = atomic.value_range;
    let raw: Vec<f64> = match acc {
        Acc::Count(v) | Acc::Sum(v) => v,
        Acc::Distinct(v) => v.into_iter().map(|s| s.len() as f64).collect(),
        Acc::Avg(v) => v
            .into_iter()
            .map(|(s, n)| if n == 0 { range.lo } else { s / n as f64 })
            .collect(),
    };
    Ok(GroupAggregates {
        atomic_id: atomic.id.clone(),
        values: raw.into_iter().map(|x| range.clamp(x)).collect(),
    })
}

/// An atomic query bound to a dataset: resolved thresholds and exact,
/// range-clamped aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundAtomic {
    pub query: AtomicQuery,
    pub thresholds: Vec<f64>,
    pub exact: Vec<f64>,
}

impl BoundAtomic {
    /// Binds precomputed exact values (clamped to the value range).
    pub fn from_values(query: AtomicQuery, exact: Vec<f64>) -> Result<Self> {
        query.validate()?;
        let k = exact.len();
        let exact: Vec<f64> = exact.into_iter().map(|x| query.value_range.clamp(x)).collect();
        let thresholds = match &query.thresholds {
            Thresholds::ZScore { zscore } => vec![threshold_zscore(&exact, *zscore)?; k],
            t => t.resolve(k)?,
        };
        if let Some(c) = thresholds.iter().find(|c| !query.value_range.contains(**c)) {
            return Err(Error::InvalidAtomic {
                id: query.id.clone(),
                message: format!("threshold {c} outside value range"),
            });
        }
        Ok(Self {
            query,
            thresholds,
            exact,
        })
    }

    pub fn k(&self) -> usize {
        self.exact.len()
    }

    pub fn sensitivity(&self) -> f64 {
        self.query.aggregate.sensitivity
    }

    pub fn range_width(&self) -> f64 {
        self.query.value_range.width()
    }

    pub fn direction(&self) -> Direction {
        self.query.direction
    }

    /// Ground truth for predicate `j`.
    pub fn truth(&self, j: usize) -> bool {
        self.query.direction.satisfied(self.exact[j], self.thresholds[j])
    }

    pub fn truth_set(&self) -> PredicateSet {
        (0..self.k()).filter(|&j| self.truth(j)).collect()
    }
}

/// A compiled query with every atomic bound; `atomics[i]` matches
/// `compiled.atomics[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery {
    pub compiled: CompiledQuery,
    pub atomics: Vec<BoundAtomic>,
    pub k: usize,
}

impl BoundQuery {
    pub fn new(compiled: CompiledQuery, atomics: Vec<BoundAtomic>) -> Result<Self> {
        if compiled.atomics.len() != atomics.len() {
            return Err(Error::InvalidParameter(format!(
                "{} bindings for {} atomics",
                atomics.len(),
                compiled.atomics.len()
            )));
        }
        for (id, b) in compiled.atomics.iter().zip(&atomics) {
            if *id != b.query.id {
                return Err(Error::UnknownAtomic(id.clone()));
            }
        }
        let k = atomics.first().map_or(0, BoundAtomic::k);
        if k == 0 {
            return Err(Error::EmptyDomain);
        }
        if atomics.iter().any(|a| a.k() != k) {
            return Err(Error::InvalidParameter("atomics disagree on domain size".into()));
        }
        Ok(Self {
            compiled,
            atomics,
            k,
        })
    }

    pub fn atomic(&self, id: &str) -> Option<&BoundAtomic> {
        self.compiled.index_of(id).map(|i| &self.atomics[i])
    }

    /// Non-private ground truth: predicates on which the tree holds when
    /// every leaf is evaluated on exact aggregates.
    pub fn true_answer(&self) -> PredicateSet {
        let index: HashMap<&str, usize> = self
            .compiled
            .atomics
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        (0..self.k)
            .filter(|&j| {
                self.compiled
                    .tree
                    .eval_with(&mut |id| self.atomics[index[id]].truth(j))
            })
            .collect()
    }
}

/// Binds every atomic of `compiled` against the dataset.
pub fn bind(
    dataset: &Dataset,
    compiled: &CompiledQuery,
    declared: &[AtomicQuery],
    domain: &PredicateDomain,
) -> Result<BoundQuery> {
    let mut bound = Vec::with_capacity(compiled.n());
    for id in &compiled.atomics {
        let q = declared
            .iter()
            .find(|q| &q.id == id)
            .ok_or_else(|| Error::UnknownAtomic(id.clone()))?;
        let agg = exact_aggregate(dataset, q, domain)?;
        bound.push(BoundAtomic::from_values(q.clone(), agg.values)?);
    }
    BoundQuery::new(compiled.clone(), bound)
}

/// Ground truth for a compiled query over a dataset.
pub fn true_answer(
    dataset: &Dataset,
    compiled: &CompiledQuery,
    declared: &[AtomicQuery],
    domain: &PredicateDomain,
) -> Result<PredicateSet> {
    Ok(bind(dataset, compiled, declared, domain)?.true_answer())
}
